"""airtune: tailors an abstract interpreter's configuration to a program and
resource budget by cost-driven search over domain/settings recipes."""

__version__ = "0.1.0"
