"""
The blocklynft project configuration file.

An LLSD XML map, by default 'blocklynft.xml' found by searching up from the
working directory:

    version    "1"
    type       "blocklynft"
    accounts   account names of the simulated ledger
    port       metadata server port
    state_dir  directory holding the ledger journal
    blocks     optional custom-block JSON file, relative to this file
    token_id   plant token that log_crop writes to
    sim        simulator settings (see sensor_sim.SimConfig)
"""

import logging
import os

import llsd

from blocklynft import common

logger = logging.getLogger("blocklynft.configfile")

BLOCKLYNFT_CONFIG_FILE = "blocklynft.xml"
BLOCKLYNFT_CONFIG_VERSION = "1"
BLOCKLYNFT_CONFIG_TYPE = "blocklynft"

DEFAULT_ACCOUNTS = ["alice", "bob"]
DEFAULT_PORT = 5000
DEFAULT_STATE_DIR = "state"


class ConfigurationError(common.BlocklyNftError):
    pass


def default_config_file():
    return os.environ.get("BLOCKLYNFT_CONFIG_FILE", BLOCKLYNFT_CONFIG_FILE)


class ProjectConfiguration(common.Serialized):
    """
    A blocklynft configuration. Keys are serialized; 'path' is not.
    """

    # Setting 'path' as a class attribute tells Serialized not to save it.
    path = None

    def __init__(self, path=None):
        self.version = BLOCKLYNFT_CONFIG_VERSION
        self.type = BLOCKLYNFT_CONFIG_TYPE
        self.accounts = list(DEFAULT_ACCOUNTS)
        self.port = DEFAULT_PORT
        self.state_dir = DEFAULT_STATE_DIR
        self.token_id = 1
        self.sim = {}
        if path is not None:
            self.__load(path)

    def absolute_path(self, path):
        """
        path made absolute relative to the configuration file's directory
        (the working directory when there is no file).
        """
        if os.path.isabs(path):
            return path
        base = os.path.dirname(self.path) if self.path else os.getcwd()
        return os.path.abspath(os.path.join(base, path))

    @property
    def blocks_path(self):
        blocks = self.get("blocks")
        return self.absolute_path(blocks) if blocks else None

    @property
    def state_path(self):
        return self.absolute_path(self.state_dir)

    def save(self):
        if self.path is None:
            raise ConfigurationError("configuration has no file to save to")
        logger.debug("Writing configuration file %s" % self.path)
        with open(self.path, "wb") as f:
            f.write(llsd.format_pretty_xml(dict(self)))

    def __load(self, path):
        if os.path.isabs(path):
            self.path = path
        else:
            abs_path = os.path.abspath(path)
            found_path = common.search_up_for_file(abs_path)
            self.path = found_path if found_path is not None else abs_path
        if not os.path.exists(self.path):
            logger.info("Configuration file '%s' not found; using defaults" % self.path)
            return
        if not os.path.isfile(self.path):
            raise ConfigurationError("configuration path %s is not a file" % self.path,
                                     case="bad-config-file")
        with open(self.path, "rb") as f:
            config_xml = f.read()
        if not config_xml:
            logger.warning("Configuration file '%s' is empty" % self.path)
            return
        try:
            saved_data = llsd.parse(config_xml)
        except llsd.LLSDParseError:
            raise ConfigurationError(
                "Configuration file %s is corrupt. Aborting..." % self.path,
                case="bad-config-file",
            )
        if not isinstance(saved_data, dict) or saved_data.get("type") != BLOCKLYNFT_CONFIG_TYPE:
            raise ConfigurationError(
                self.path + " not a blocklynft configuration file", case="bad-config-file"
            )
        if saved_data.get("version") != BLOCKLYNFT_CONFIG_VERSION:
            raise ConfigurationError(
                "%s has version %r; this blocklynft reads version %s"
                % (self.path, saved_data.get("version"), BLOCKLYNFT_CONFIG_VERSION),
                case="bad-config-file",
            )
        self.update(saved_data)
        self.__check()
        logger.debug("Configuration file '%s'" % self.path)

    def __check(self):
        problems = []
        if not isinstance(self.accounts, list) or not all(
            isinstance(name, str) and name for name in self.accounts
        ):
            problems.append("accounts must be a list of names")
        if not isinstance(self.port, int) or isinstance(self.port, bool):
            problems.append("port must be an integer")
        if not isinstance(self.state_dir, str) or not self.state_dir:
            problems.append("state_dir must be a path")
        if "blocks" in self and not isinstance(self["blocks"], str):
            problems.append("blocks must be a path")
        if not isinstance(self.token_id, int) or isinstance(self.token_id, bool):
            problems.append("token_id must be an integer")
        if not isinstance(self.sim, dict):
            problems.append("sim must be a map")
        if problems:
            raise ConfigurationError(
                "%s: %s" % (self.path, "; ".join(problems)), case="bad-config-file"
            )


def load(path=None):
    return ProjectConfiguration(path if path is not None else default_config_file())
