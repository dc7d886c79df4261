"""Extension modules built as standalone shared libraries."""
