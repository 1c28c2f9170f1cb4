"""DEA efficiency scoring and GM(1,1) grey forecasting for regional energy panels."""

__version__ = "0.1.0"
