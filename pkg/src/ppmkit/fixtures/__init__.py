"""Bundled example policy documents in canonical form."""

from importlib import resources


def fixture_text(name: str) -> str:
    """Text of a bundled fixture, e.g. ``fixture_text("garmin")``."""
    return (
        resources.files(__package__).joinpath(f"{name}.ppm").read_text(encoding="utf-8")
    )
