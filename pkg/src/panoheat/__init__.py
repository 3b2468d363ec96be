"""Indoor light and heat maps from a calibrated HDR panorama and a room layout."""

__version__ = "0.1.0"
