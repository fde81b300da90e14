import sys

if sys.version_info >= (3, 11):
    import tomllib as toml
else:  # pragma: no cover
    import tomli as toml

TOMLDecodeError = toml.TOMLDecodeError


def loads(text: str) -> dict:
    return toml.loads(text)
