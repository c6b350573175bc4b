"""Output format plugins.

Formats are discovered through the `ubp.formats` entry-point group, so other
packages can add their own. The bundled formats are also registered directly
for running from a source checkout.
"""
import abc
import logging
from dataclasses import dataclass, field

import entrypoints

from ubp.errors import InputError


logger = logging.getLogger(__name__)

ENTRYPOINT_GROUP = "ubp.formats"


@dataclass(frozen=True)
class Document:
    """A command's result in both of its renderings.

    Attributes:
        payload: nested dict, the canonical form
        table: header row followed by data rows, the flattened mirror
    """

    payload: dict
    table: list = field(default_factory=list)


class PluginBase(abc.ABC):
    @property
    @abc.abstractmethod
    def id(self):
        pass

    @property
    @abc.abstractmethod
    def description(self):
        pass


class FormatPlugin(PluginBase, abc.ABC):
    @abc.abstractmethod
    def __init__(self, document):
        """Defines the construction of this output format.

        Args:
            document (Document): the result to render
        """
        pass

    @abc.abstractmethod
    def generate(self):
        """Renders the document and returns the text to write."""
        pass


def _builtin_formats():
    from ubp.builtin.csv import CSV
    from ubp.builtin.json import JSON

    return {"csv": CSV, "json": JSON}


def load_plugins():
    """Maps format ids to plugin classes; installed entry points win over the bundled ones."""
    plugins = _builtin_formats()

    for name, entrypoint in entrypoints.get_group_named(ENTRYPOINT_GROUP).items():
        try:
            source = entrypoint.load()
        except ImportError as e:
            logger.warning("Could not load output format %s: %s", name, e)
            continue

        if isinstance(source, type) and issubclass(source, FormatPlugin):
            plugins[name] = source

    return plugins


def render(document, file_format):
    """Renders a document with the named format plugin.

    Raises:
        InputError for an unknown format
    """
    plugins = load_plugins()
    if file_format not in plugins:
        raise InputError(
            "Unknown output format '{}' (available: {})".format(file_format, ", ".join(sorted(plugins)))
        )

    return plugins[file_format](document).generate()


def export(document, file_format, file_path=None):
    """Renders a document and writes it to a file, or returns the text if no path is given."""
    text = render(document, file_format)

    if file_path is None:
        return text

    with open(file_path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("Wrote %s output to %s", file_format, file_path)

    return text
