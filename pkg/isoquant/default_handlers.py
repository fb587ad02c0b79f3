# -*- coding: utf-8 -*-
"""
.. testsetup:: handlers

    import isoquant

Calibration maps are saved as small text documents. By default
``isoquant`` reads and writes YAML, but maps can also be stored as JSON,
or TOML when the `toml <https://pypi.org/project/toml/>`_ library is
installed. Each format has a handler.

Handlers
--------

A handler needs to do three things:

- detect whether it can parse the given piece of text
- parse text into a Python dictionary
- export a dictionary back into text

Calling :py:func:`isoquant.loads <isoquant.loads>` without a handler
tries each handler's ``detect`` in turn. Passing a handler to
:py:func:`isoquant.dumps <isoquant.dumps>` changes the export format:

::

    >>> import isoquant
    >>> from isoquant.core import ExplicitLevels, Sample
    >>> from isoquant.default_handlers import JSONHandler
    >>> cmap = isoquant.fit([Sample(1, 1), Sample(2, 0)], ExplicitLevels((0, 0.5, 1)))
    >>> text = isoquant.dumps(cmap, handler=JSONHandler())
    >>> isoquant.detect_format(text, isoquant.handlers) #doctest: +ELLIPSIS
    <isoquant.default_handlers.JSONHandler object at 0x...>
    >>> isoquant.loads(text) == cmap
    True

Every handler writes the same document: a format ``version``, the
``grid`` and one record per block with its score extent, level, total
weight and weighted target sum. Keys are sorted and floats are written
with ``repr`` so reading a map back reproduces it exactly.
"""
from __future__ import annotations

import json
import re
from types import ModuleType
from typing import Any, Type

import yaml

SafeDumper: Type[yaml.CSafeDumper] | Type[yaml.SafeDumper]
SafeLoader: Type[yaml.CSafeLoader] | Type[yaml.SafeLoader]
toml: ModuleType | None

try:
    from yaml import CSafeDumper as SafeDumper
    from yaml import CSafeLoader as SafeLoader
except ImportError:
    from yaml import SafeDumper
    from yaml import SafeLoader

try:
    import toml
except ImportError:
    toml = None

from .errors import MapFormatError
from .util import u


__all__ = ["BaseHandler", "YAMLHandler", "JSONHandler"]

if toml:
    __all__.append("TOMLHandler")


class BaseHandler:
    """
    BaseHandler lays out the steps to detecting, parsing and exporting a
    map document.

    All default handlers are subclassed from BaseHandler.
    """

    DETECT: re.Pattern[str] | None = None
    NAME: str = ""

    def __init__(self, detect: re.Pattern[str] | None = None) -> None:
        self.DETECT = detect or self.DETECT

        if self.DETECT is None:
            raise NotImplementedError(
                "No detection pattern defined. "
                "Please set {}.DETECT to a regular expression".format(
                    self.__class__.__name__
                )
            )

    def detect(self, text: str) -> bool:
        """
        Decide whether this handler can parse the given ``text``,
        and return True or False.
        """
        assert self.DETECT is not None
        return bool(self.DETECT.match(text))

    def load(self, text: str) -> Any:
        """
        Parse a document and return a dict
        """
        raise NotImplementedError

    def export(self, document: dict[str, Any]) -> str:
        """
        Turn a document back into text
        """
        raise NotImplementedError


class YAMLHandler(BaseHandler):
    """
    Load and export YAML maps, in YAML's "safe" mode. Documents start with
    an explicit ``---`` so they can be recognised.
    """

    DETECT = re.compile(r"^\s*---")
    NAME = "yaml"

    def load(self, text: str) -> Any:
        try:
            return yaml.load(text, Loader=SafeLoader)
        except yaml.YAMLError as e:
            raise MapFormatError(f"invalid YAML map: {e}") from None

    def export(self, document: dict[str, Any]) -> str:
        text = yaml.dump(
            document,
            Dumper=SafeDumper,
            default_flow_style=False,
            explicit_start=True,
            sort_keys=True,
        )
        return u(text)


class JSONHandler(BaseHandler):
    """
    Load and export JSON maps.
    """

    DETECT = re.compile(r"^\s*\{")
    NAME = "json"

    def load(self, text: str) -> Any:
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise MapFormatError(f"invalid JSON map: {e}") from None

    def export(self, document: dict[str, Any]) -> str:
        "Turn a document into JSON"
        text = json.dumps(document, indent=2, sort_keys=True, allow_nan=False)
        return u(text) + "\n"


if toml:

    class TOMLHandler(BaseHandler):
        """
        Load and export TOML maps. Blocks become an array of tables.
        """

        DETECT = re.compile(r"^\s*(?:\[|[A-Za-z_]+\s*=)")
        NAME = "toml"

        def load(self, text: str) -> Any:
            assert toml is not None
            try:
                return toml.loads(text)
            except toml.TomlDecodeError as e:
                raise MapFormatError(f"invalid TOML map: {e}") from None

        def export(self, document: dict[str, Any]) -> str:
            "Turn a document into TOML"
            assert toml is not None
            return u(toml.dumps(document))

else:
    TOMLHandler: Type[TOMLHandler] | None = None  #  type: ignore[no-redef]
