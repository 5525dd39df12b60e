"""Sandbox shim package."""

from .runner import handle_request, json_safe, load_graph, main, run_code

__all__ = ["handle_request", "json_safe", "load_graph", "main", "run_code"]
