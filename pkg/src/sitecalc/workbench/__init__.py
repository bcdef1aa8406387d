"""File formats, builtin categories and the command-line driver."""
