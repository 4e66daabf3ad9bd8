"""fatou-geometry command-line tools."""
