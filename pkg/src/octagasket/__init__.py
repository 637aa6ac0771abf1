"""Cell-graph Laplacians of the projective octagasket.

Submodules: ``geometry`` (planar realisation), ``graphbuild`` (cell graphs and
Laplacians), ``spectral`` (eigenvalues and tables), ``symmetry`` (D8 action and
O/E/R/C types), ``pde`` (heat and wave solutions), ``metric`` (graph distances).
"""

__version__ = "0.1.0"
