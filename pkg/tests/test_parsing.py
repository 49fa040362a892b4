import pytest

from lockforge.pipeline.parsing import (
    ParseError,
    parse_code_blocks,
    parse_grades,
    parse_headline_score,
    parse_numbered_list,
    parse_status,
    parse_yaml_block,
)


class TestNumberedList:
    def test_basic(self):
        assert parse_numbered_list("1. alpha\n2. beta") == ["alpha", "beta"]

    def test_paren_style_and_surrounding_prose(self):
        text = "Here you go:\n\n1) one\n2) two\n\nDone."
        assert parse_numbered_list(text) == ["one", "two"]

    def test_expect_pins_length(self):
        with pytest.raises(ParseError, match="expected 3 items, found 2"):
            parse_numbered_list("1. a\n2. b", expect=3)

    def test_numbering_must_be_consecutive_from_one(self):
        with pytest.raises(ParseError, match="jumps to 3"):
            parse_numbered_list("1. a\n3. b")
        with pytest.raises(ParseError, match="jumps to 2"):
            parse_numbered_list("2. a")

    def test_no_list(self):
        with pytest.raises(ParseError, match="no numbered list"):
            parse_numbered_list("just prose")

    def test_item_text_trimmed(self):
        assert parse_numbered_list("  1.   spaced out   ") == ["spaced out"]


class TestCodeBlocks:
    def test_single_file(self):
        text = "Intro.\n```python\n# file: main.py\nprint(1)\n```"
        assert parse_code_blocks(text) == {"main.py": "print(1)\n"}

    def test_multiple_files_and_bare_fence(self):
        text = (
            "```\n# file: a.py\nA = 1\n```\n"
            "```python\n# file: pkg/b.py\nB = 2\n```\n"
        )
        files = parse_code_blocks(text)
        assert sorted(files) == ["a.py", "pkg/b.py"]
        assert files["pkg/b.py"] == "B = 2\n"

    def test_yaml_blocks_are_not_files(self):
        text = "```yaml\n# file: sneaky.py\nx: 1\n```"
        assert parse_code_blocks(text) == {}

    def test_blocks_without_header_ignored(self):
        text = "```\nno header here\n```"
        assert parse_code_blocks(text) == {}

    def test_last_block_wins_per_path(self):
        text = (
            "```\n# file: m.py\nold = True\n```\n"
            "```\n# file: m.py\nnew = True\n```\n"
        )
        assert parse_code_blocks(text) == {"m.py": "new = True\n"}

    @pytest.mark.parametrize("path", ["/etc/passwd", "../up.py", "a/../../b.py", "c:stream"])
    def test_illegal_paths(self, path):
        with pytest.raises(ParseError, match="illegal file path"):
            parse_code_blocks(f"```\n# file: {path}\nx = 1\n```")

    def test_unterminated_fence(self):
        with pytest.raises(ParseError, match="unterminated"):
            parse_code_blocks("```python\n# file: a.py\nx = 1")

    def test_body_normalized_to_single_trailing_newline(self):
        text = "```\n# file: a.py\nx = 1\n\n\n```"
        assert parse_code_blocks(text)["a.py"] == "x = 1\n"


class TestYamlBlock:
    def test_extracts_body(self):
        assert parse_yaml_block("```yaml\nkey: value\n```") == "key: value"

    def test_requires_exactly_one(self):
        with pytest.raises(ParseError, match="no ```yaml block"):
            parse_yaml_block("```python\nx = 1\n```")
        with pytest.raises(ParseError, match="found 2"):
            parse_yaml_block("```yaml\na: 1\n```\n```yaml\nb: 2\n```")

    def test_coexists_with_code_blocks(self):
        text = "```yaml\na: 1\n```\n```\n# file: x.py\npass\n```"
        assert parse_yaml_block(text) == "a: 1"
        assert parse_code_blocks(text) == {"x.py": "pass\n"}


class TestHeadlineScore:
    def test_basic(self):
        assert parse_headline_score("SCORE: 7\nbecause reasons") == 7

    def test_indented_line(self):
        assert parse_headline_score("verdict:\n  SCORE: 10") == 10

    @pytest.mark.parametrize("n", [0, 11, 99])
    def test_out_of_range(self, n):
        with pytest.raises(ParseError, match="outside 1..10"):
            parse_headline_score(f"SCORE: {n}")

    def test_missing(self):
        with pytest.raises(ParseError, match="no SCORE"):
            parse_headline_score("score: none really")


class TestStatus:
    def test_done_and_revising(self):
        assert parse_status("STATUS: DONE") == "DONE"
        assert parse_status("prose\nSTATUS: REVISING\nmore") == "REVISING"

    def test_missing_or_other_word(self):
        with pytest.raises(ParseError):
            parse_status("STATUS: MAYBE")


class TestGrades:
    def test_basic(self):
        text = "1. correct\n2. incorrect\n3. Correct."
        assert parse_grades(text, 3) == [True, False, True]

    def test_wrong_word(self):
        with pytest.raises(ParseError, match="must be correct or incorrect"):
            parse_grades("1. right\n2. correct", 2)

    def test_wrong_count(self):
        with pytest.raises(ParseError, match="expected 3 items"):
            parse_grades("1. correct\n2. correct", 3)
