"""Configuration, campaign export, figures and the command line."""
