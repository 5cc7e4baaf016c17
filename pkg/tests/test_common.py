import os

import pytest

from blocklynft import common
from tests.basetest import BaseTest, chdir, temp_dir


@pytest.mark.parametrize(
    "value,want",
    [
        (30.0, "30"),
        (30, "30"),
        (-2.0, "-2"),
        (0.1 + 0.2, "0.30000000000000004"),
        (23.5, "23.5"),
        ("Hello World", "Hello World"),
        ("", ""),
        (True, "true"),
        (False, "false"),
        (None, ""),
    ],
)
def test_render_value(value, want):
    assert common.render_value(value) == want


def test_is_number_excludes_booleans():
    assert common.is_number(1)
    assert common.is_number(1.5)
    assert not common.is_number(True)
    assert not common.is_number("1")


def test_sha256_hex():
    assert common.sha256_hex("") == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    )


def test_error_case():
    assert common.BlocklyNftError("boom").case == "error"
    assert common.BlocklyNftError("boom", case="not-owner").case == "not-owner"
    assert str(common.BlocklyNftError("boom", case="not-owner")) == "boom"


def test_data_files_are_bundled():
    for name in ("helloworld.xml", "toolbox.xml", "plant_demo.xml", "plant_blocks.json"):
        assert os.path.isfile(common.data_file(name)), name


class TestSearchUp(BaseTest):
    def test_finds_file_in_parent(self):
        with temp_dir() as root:
            nested = os.path.join(root, "a", "b")
            os.makedirs(nested)
            target = os.path.join(root, "blocklynft.xml")
            with open(target, "w") as f:
                f.write("")
            with chdir(nested):
                found = common.search_up_for_file("blocklynft.xml")
            assert os.path.realpath(found) == os.path.realpath(target)

    def test_missing_file(self):
        with temp_dir() as root, chdir(root):
            assert common.search_up_for_file("no-such-file-anywhere.xml") is None


class TestSerialized(BaseTest):
    def test_attributes_are_keys(self):
        class Thing(common.Serialized):
            path = None

        thing = Thing()
        thing.name = "plant"
        thing.path = "/tmp/x"
        assert dict(thing) == {"name": "plant"}
        assert thing.path == "/tmp/x"
        copied = thing.copy()
        assert isinstance(copied, Thing)
        assert copied.name == "plant"
