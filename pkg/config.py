"""
KBX - Configuration Management

Loads settings from a .env file and the environment and provides defaults
for the command-line tool: step limit, corpus location, log level, store
file suffix and certificate digest.
"""

import hashlib
import logging
import os
from pathlib import Path

from dotenv import load_dotenv


class Config:
    """Configuration manager for KBX."""

    def __init__(self, env_path=None):
        """
        Initialize configuration with fallback chain:
        1. .env file (loaded into the environment, overriding it)
        2. Environment variables
        3. Built-in defaults

        Args:
            env_path: Optional path to .env file. If None, uses the .env next to this file.
        """
        if env_path is None:
            env_path = Path(__file__).parent / ".env"
        else:
            env_path = Path(env_path)
        self._env_path = env_path

        if env_path.exists():
            load_dotenv(env_path, override=True)

        # Engine settings
        self.max_steps_raw = os.getenv("KBX_MAX_STEPS", "100000")

        # Corpus and output settings
        self.corpus_dir = Path(os.getenv("KBX_CORPUS_DIR", str(Path(__file__).parent / "corpus")))
        self.store_suffix = os.getenv("KBX_STORE_SUFFIX", ".kbxc")

        # Certificates and logging
        self.digest = os.getenv("KBX_DIGEST", "sha256")
        self.log_level = os.getenv("KBX_LOG_LEVEL", "WARNING").upper()

    @property
    def max_steps(self) -> int:
        return int(self.max_steps_raw)

    def validate(self):
        """
        Validate configuration.

        Returns:
            tuple: (is_valid, error_message)
        """
        try:
            max_steps = self.max_steps
        except ValueError:
            return False, f"KBX_MAX_STEPS must be an integer, got {self.max_steps_raw!r}"
        if max_steps < 1:
            return False, "KBX_MAX_STEPS must be positive"

        if not self.store_suffix.startswith("."):
            return False, "KBX_STORE_SUFFIX must start with a dot"

        if self.digest not in hashlib.algorithms_available:
            return False, f"KBX_DIGEST {self.digest!r} is not a hashlib algorithm"

        if not isinstance(logging.getLevelName(self.log_level), int):
            return False, f"KBX_LOG_LEVEL {self.log_level!r} is not a logging level"

        return True, None

    def reload(self):
        """
        Reload configuration from all sources (.env, environment).
        """
        self.__init__(env_path=self._env_path)

    def __repr__(self):
        return (
            f"Config(\n"
            f"  max_steps={self.max_steps_raw},\n"
            f"  corpus_dir={self.corpus_dir},\n"
            f"  store_suffix={self.store_suffix},\n"
            f"  digest={self.digest},\n"
            f"  log_level={self.log_level}\n"
            f")"
        )


def create_default_env_file(path=None):
    """
    Create a default .env template file.

    Args:
        path: Path where to create the .env file. Defaults to current directory.
    """
    if path is None:
        path = Path.cwd() / ".env"
    else:
        path = Path(path)

    template = """# KBX Configuration

# Engine Settings
# Upper bound on rewrite steps per execution
KBX_MAX_STEPS=100000

# Corpus Settings
# Directory searched for *.case manifests by `python -m kbx bench`
# KBX_CORPUS_DIR=/path/to/corpus

# Synchronizer Settings
# Suffix of the complements store written next to a target model
KBX_STORE_SUFFIX=.kbxc

# Certificate Settings
# Any hashlib algorithm; recorded in every certificate header
KBX_DIGEST=sha256

# Logging
KBX_LOG_LEVEL=WARNING
"""

    if path.exists():
        raise FileExistsError(f".env file already exists at {path}")

    with open(path, "w") as f:
        f.write(template)

    return path
