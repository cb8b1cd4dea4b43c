"""API layer package: configuration, report schemas and the command line."""
__all__: list[str] = []
