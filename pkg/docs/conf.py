#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# isoquant documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

extensions = ["sphinx.ext.autodoc", "sphinx.ext.doctest"]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "isoquant"
version = "0.1.0"
release = "0.1.0"

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = "sphinx"

html_theme = "alabaster"
html_static_path = ["_static"]
htmlhelp_basename = "isoquantdoc"

man_pages = [(master_doc, "isoquant", "isoquant Documentation", [], 1)]
