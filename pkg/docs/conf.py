import datetime

import sphinxcontrib.katex as katex

import symdock


# Package information
project = "symdock"
author = "The symdock developers"
copyright = f"2024-{datetime.date.today().year}, {author}"
version = release = symdock.__version__

# Build settings
extensions = [
    "myst_parser",
    "sphinx.ext.autodoc",
    "sphinx.ext.autosectionlabel",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinxcontrib.katex",
]
master_doc = "index"
autosectionlabel_prefix_document = True
napoleon_google_docstring = True
napoleon_numpy_docstring = False

# Output options
html_theme = "sphinx_rtd_theme"
html_show_sphinx = False
htmlhelp_basename = "symdockdoc"

# autodoc
autodoc_typehints = "description"
autodoc_member_order = "bysource"
autodoc_default_options = {
    "members": True,
    "show-inheritance": True,
}

# katex
latex_macros = r"""
    \def \R       {\mathbb{R}}
    \def \transp  #1{#1^\top}
"""
katex_macros = katex.latex_defs_to_katex_macros(latex_macros)
katex_options = "macros: {" + katex_macros + "}"
latex_elements = {"preamble": latex_macros}
