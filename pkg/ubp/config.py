"""Handles operations related to the configuration of ubp."""
import os
import stat
import configparser
import logging

from ubp.backtest import MODES


UNIVERSAL_INFO = [
    "This section sets up the universal portfolio: the Dirichlet prior concentration",
    "(1 is the uniform prior), the number of Monte Carlo particles, the random seed and",
    "the backtest mode (auto, monte-carlo or quadrature).",
]

HINDSIGHT_INFO = "This section sets the Frank-Wolfe gap tolerance and iteration limit of the hindsight solver."
OUTPUT_INFO = "This section sets the default output format (json or csv)."
RUNTIME_INFO = "This section caps the number of worker threads. The UBP_THREADS environment variable overrides it."
LOGGING_INFO = "This section sets the log level (DEBUG, INFO, WARNING or ERROR)."

CONFIG_TEMPLATE = {
    "UNIVERSAL": {"PRIOR_ALPHA": "1.0", "SAMPLES": "100000", "SEED": "42", "MODE": "auto"},
    "HINDSIGHT": {"TOLERANCE": "1e-10", "MAX_ITER": "50000"},
    "OUTPUT": {"FORMAT": "json"},
    "RUNTIME": {"THREADS": "1"},
    "LOGGING": {"LEVEL": "WARNING"},
}

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def config_location():
    return os.environ.get("UBP_CONFIG") or os.path.expanduser(
        os.path.join("~", ".ubp", "config.ini")
    )


def load_config(file_path):
    """
        If a config exists at the given location, load and validate it. Otherwise
        return the built-in defaults.

        Raises:
            configparser.Error if the file is malformed
    """
    config = create_default_config()

    if os.path.exists(file_path):
        config.read(file_path)
        validate_config(config)

    return config


def validate_config(config):
    """
        Validates a configuration by ensuring the required options and sections
        are present and every value parses and lies in range.

        Args:
            config: the configuration object to validate

        Raises:
            configparser.Error naming the offending section and option
    """
    validate_required_options(config)
    validate_numbers(config)
    validate_choices(config)


def validate_required_options(config):
    """
        Ensures that all of the required ubp config options and sections are present.
    """
    missing = set(CONFIG_TEMPLATE.keys()) - set(config.sections())
    if missing:
        raise configparser.Error("Missing Required Section(s): " + ", ".join(sorted(missing)))

    for section_name, section in CONFIG_TEMPLATE.items():
        for option in section.keys():
            if not config.has_option(section_name, option):
                raise configparser.Error("Missing option " + option + " from section " + section_name)


def _check(config, section, option, convert, accept, requirement):
    try:
        value = convert(config[section][option])
    except ValueError:
        raise configparser.Error(
            "The value of {} from section {}, option {} is not a number!".format(config[section][option], section, option)
        )
    if not accept(value):
        raise configparser.Error("Option {} from section {} must be {}".format(option, section, requirement))


def validate_numbers(config):
    """
        Ensures that the numeric options parse and lie in their allowed ranges.
    """
    _check(config, "UNIVERSAL", "PRIOR_ALPHA", float, lambda v: v > 0, "positive")
    _check(config, "UNIVERSAL", "SAMPLES", int, lambda v: v >= 1, "at least 1")
    _check(config, "UNIVERSAL", "SEED", int, lambda v: v >= 0, "nonnegative")
    _check(config, "HINDSIGHT", "TOLERANCE", float, lambda v: v > 0, "positive")
    _check(config, "HINDSIGHT", "MAX_ITER", int, lambda v: v >= 1, "at least 1")
    _check(config, "RUNTIME", "THREADS", int, lambda v: v >= 1, "at least 1")


def validate_choices(config):
    if config["UNIVERSAL"]["MODE"] not in MODES:
        raise configparser.Error(
            "Option MODE from section UNIVERSAL must be one of " + ", ".join(MODES)
        )
    if config["LOGGING"]["LEVEL"].upper() not in LOG_LEVELS:
        raise configparser.Error(
            "Option LEVEL from section LOGGING must be one of " + ", ".join(LOG_LEVELS)
        )


def resolve_threads(config):
    """UBP_THREADS takes precedence over the configured thread count."""
    value = os.environ.get("UBP_THREADS") or config["RUNTIME"]["THREADS"]
    try:
        threads = int(value)
    except ValueError:
        raise configparser.Error("UBP_THREADS must be an integer, got " + value)
    return max(threads, 1)


def log_level(config):
    return getattr(logging, config["LOGGING"]["LEVEL"].upper())


def write_config(config, file_path):
    """
        Writes the config file, creating its directory if needed, readable
        only by the current user.
    """
    directory = os.path.dirname(file_path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    with open(file_path, "w") as f:
        config.write(f)

    os.chmod(file_path, stat.S_IRUSR | stat.S_IWUSR)


def create_default_config():
    """Creates a default configuration with comments describing each section."""
    config = configparser.ConfigParser(allow_no_value=True)
    config.optionxform = str

    for section in CONFIG_TEMPLATE:
        config.add_section(section)

    for line in UNIVERSAL_INFO:
        config.set("UNIVERSAL", "; " + line)

    config.set("HINDSIGHT", "; " + HINDSIGHT_INFO)
    config.set("OUTPUT", "; " + OUTPUT_INFO)
    config.set("RUNTIME", "; " + RUNTIME_INFO)
    config.set("LOGGING", "; " + LOGGING_INFO)

    config.read_dict(CONFIG_TEMPLATE)

    return config
