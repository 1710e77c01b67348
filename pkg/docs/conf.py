# -*- coding: utf-8 -*-
#
# pslab documentation build configuration file.

import sys, os, sphinx

readthedocs = os.environ.get('READTHEDOCS', None) == 'True'

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

# -- General configuration -----------------------------------------------------

extensions = [
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'django': ('https://docs.djangoproject.com/en/stable/',
               'https://docs.djangoproject.com/en/stable/_objects/'),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

source_suffix = '.rst'
exclude_patterns = ['_build']
master_doc = 'index'

project = u'pslab'
copyright = u'pslab contributors'

version = '1.0'
release = '1.0.0'

pygments_style = 'trac'

# -- Options for HTML output ---------------------------------------------------

if sphinx.version_info >= (1, 3):
    html_theme = 'default' if readthedocs else 'classic'
else:
    html_theme = 'default'

html_show_sourcelink = False
html_sidebars = {'**': ['globaltoc.html', 'relations.html', 'searchbox.html']}
htmlhelp_basename = 'pslabdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'pslab.tex', u'pslab Documentation', u'pslab contributors', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'pslab', u'pslab Documentation', [u'pslab contributors'], 1)
]
