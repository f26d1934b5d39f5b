"""Berry curvature, Chern numbers and quench dynamics of a driven qubit whose
eigenbundle realizes a Dirac monopole in parameter space."""

__version__ = "0.1.0"
