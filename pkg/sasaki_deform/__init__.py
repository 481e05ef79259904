"""sasaki-deform: special Legendrian deformation toolkit on Sasaki spheres."""

__version__ = "0.1.0"
