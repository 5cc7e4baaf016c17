import os

import llsd

from blocklynft import configfile
from blocklynft.configfile import ConfigurationError, ProjectConfiguration
from tests.baseline_compare import BaselineCompare
from tests.basetest import BaseTest, ExpectError, chdir, envvar, temp_dir


def write_llsd(path, data):
    with open(path, "wb") as f:
        f.write(llsd.format_pretty_xml(data))


class TestConfigFile(BaseTest, BaselineCompare):
    def setUp(self):
        BaseTest.setUp(self)

    def fake_config(self):
        config = ProjectConfiguration(self.get_tmp_file())
        config.accounts = ["alice", "bob", "carol"]
        config.port = 8080
        config.state_dir = "journal"
        config.blocks = "plant_blocks.json"
        config.sim = {"seed": 42, "dt_minutes": 15}
        return config

    def test_defaults(self):
        config = ProjectConfiguration()
        assert config.accounts == ["alice", "bob"]
        assert config.port == 5000
        assert config.token_id == 1
        assert config.sim == {}
        assert config.blocks_path is None
        assert "path" not in config

    def test_save_and_reload(self):
        config = self.fake_config()
        config.save()

        reloaded = ProjectConfiguration(config.path)
        assert reloaded.accounts == ["alice", "bob", "carol"]
        assert reloaded.port == 8080
        assert reloaded.sim == {"seed": 42, "dt_minutes": 15}
        assert reloaded == config
        # relative paths resolve against the file's directory
        here = os.path.dirname(config.path)
        assert reloaded.state_path == os.path.join(here, "journal")
        assert reloaded.blocks_path == os.path.join(here, "plant_blocks.json")

    def test_saved_file_is_llsd(self):
        config = self.fake_config()
        config.save()
        with open(config.path, "rb") as f:
            data = llsd.parse(f.read())
        assert data["type"] == "blocklynft"
        assert data["version"] == "1"
        assert "path" not in data

    def test_save_without_path(self):
        with ExpectError("no file", "nowhere to save"):
            ProjectConfiguration().save()

    def test_missing_file_gives_defaults(self):
        with temp_dir() as tmp:
            config = ProjectConfiguration(os.path.join(tmp, "absent.xml"))
            assert config.accounts == ["alice", "bob"]

    def test_empty_file_gives_defaults(self):
        path = self.get_tmp_file()
        assert ProjectConfiguration(path).port == 5000

    def test_corrupt_file(self):
        path = self.get_tmp_file()
        with open(path, "w") as f:
            f.write("<llsd><map><key>type</key>")
        with ExpectError("corrupt", "unparseable llsd", exception=ConfigurationError,
                         case="bad-config-file"):
            ProjectConfiguration(path)

    def test_wrong_type(self):
        path = self.get_tmp_file()
        write_llsd(path, {"type": "packager", "version": "1"})
        with ExpectError("not a blocklynft configuration", "foreign file",
                         case="bad-config-file"):
            ProjectConfiguration(path)

    def test_wrong_version(self):
        path = self.get_tmp_file()
        write_llsd(path, {"type": "blocklynft", "version": "2"})
        with ExpectError("has version '2'", "newer file", case="bad-config-file"):
            ProjectConfiguration(path)

    def test_bad_values(self):
        path = self.get_tmp_file()
        write_llsd(path, {"type": "blocklynft", "version": "1", "accounts": "alice",
                          "port": "5000", "sim": [1]})
        with ExpectError("accounts must be a list.*port must be an integer.*sim must be a map",
                         "three problems at once", case="bad-config-file"):
            ProjectConfiguration(path)

    def test_directory_is_not_a_file(self):
        with temp_dir() as tmp:
            with ExpectError("not a file", "directory given", case="bad-config-file"):
                ProjectConfiguration(tmp)

    def test_search_up(self):
        with temp_dir() as tmp:
            write_llsd(os.path.join(tmp, "blocklynft.xml"),
                       {"type": "blocklynft", "version": "1", "port": 6001})
            nested = os.path.join(tmp, "a", "b")
            os.makedirs(nested)
            with chdir(nested):
                config = configfile.load()
            assert config.port == 6001
            assert os.path.realpath(config.path) == os.path.realpath(
                os.path.join(tmp, "blocklynft.xml"))

    def test_environment_names_the_file(self):
        with temp_dir() as tmp:
            path = os.path.join(tmp, "other.xml")
            write_llsd(path, {"type": "blocklynft", "version": "1", "accounts": ["zed"]})
            with envvar("BLOCKLYNFT_CONFIG_FILE", path):
                assert configfile.load().accounts == ["zed"]
            # an explicit path wins over the environment
            with envvar("BLOCKLYNFT_CONFIG_FILE", os.path.join(tmp, "absent.xml")):
                assert configfile.load(path).accounts == ["zed"]

    def tearDown(self):
        self.cleanup_tmp_file()
        BaseTest.tearDown(self)
