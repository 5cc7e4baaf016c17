import os


def setup():
    os.environ.pop("BLOCKLYNFT_CONFIG_FILE", None)
    os.environ.pop("BLOCKLYNFT_LOGLEVEL", None)
