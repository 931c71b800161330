"""Bundled experiment scenarios (JSON, schema documented in the README)."""

from importlib import resources


def bundled_scenario_path(name: str):
    """Filesystem path of a bundled scenario; ``name`` may omit ``.json``."""
    if not name.endswith(".json"):
        name += ".json"
    return resources.files(__name__).joinpath(name)
