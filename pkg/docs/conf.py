# -*- coding: utf-8 -*-
#
# Sphinx configuration of the SwitchingSystem-identification documentation.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))


# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.mathjax',
              'sphinx_rtd_theme',
]

autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'SwitchingSystem-identification'
copyright = u'2026, Magnus Hagdorn'
author = u'Magnus Hagdorn'

version = u'0.1'
release = u'0.1'

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'SwitchingSystemIdentificationdoc'

# -- Options for other builders ----------------------------------------------

latex_documents = [
    (master_doc, 'SwitchingSystem_identification.tex',
     'SwitchingSystem-identification Documentation',
     'Magnus Hagdorn', 'manual'),
]

man_pages = [
    (master_doc, 'switchid', 'SwitchingSystem-identification Documentation',
     [author], 1)
]

texinfo_documents = [
    (master_doc, 'SwitchingSystem-identification',
     'SwitchingSystem-identification Documentation',
     author, 'SwitchingSystem-identification',
     'Identify switching polynomial systems from state derivative data.',
     'Miscellaneous'),
]

epub_title = project
epub_exclude_files = ['search.html']


# document the __call__ method of the vector fields
def skip(app, what, name, obj, would_skip, options):
    if name == "__call__":
        return False
    return would_skip

def setup(app):
    app.connect("autodoc-skip-member", skip)
