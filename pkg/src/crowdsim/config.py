"""Plain-text ``key = value`` config grammar shared by place specs, road specs,
scenario files and sweep files.

Grammar (one directive per line):
    key = value
    # comment                (also allowed after a value)
    blank lines ignored

Keys may repeat (e.g. one ``obstacle`` line per polygon).  Values are parsed
by the consumer with the helpers below:
    scalars     42   1.5   true
    points      x,y              (no spaces inside a point)
    point list  1,2 3,4 5,6      (whitespace separated)
    fields      kind:dance center:30,25 radius:2
"""

from __future__ import annotations

import os


class ConfigError(ValueError):
    """A config/spec file failed to parse or validate."""


def parse_kv_lines(text, source="<config>"):
    """Parse config text into an ordered list of (key, value, lineno)."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        entries.append((key, value, lineno))
    return entries


def read_kv_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_kv_lines(text, source=str(path))


def entries_to_dict(entries, repeatable=(), source="<config>"):
    """Collapse (key, value, lineno) entries into a dict.

    Keys listed in `repeatable` map to a list of (value, lineno); any other
    key appearing twice is an error.
    """
    out = {}
    for key, value, lineno in entries:
        if key in repeatable:
            out.setdefault(key, []).append((value, lineno))
        elif key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        else:
            out[key] = (value, lineno)
    return out


def parse_float(value, where):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def parse_int(value, where):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {value!r}") from None


def parse_bool(value, where):
    v = value.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{where}: expected true/false, got {value!r}")


def parse_point(value, where):
    parts = value.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{where}: expected a point 'x,y', got {value!r}")
    return (parse_float(parts[0], where), parse_float(parts[1], where))


def parse_point3(value, where):
    parts = value.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{where}: expected a point 'x,y,z', got {value!r}")
    return tuple(parse_float(p, where) for p in parts)


def parse_points(value, where):
    return [parse_point(tok, where) for tok in value.split()]


def parse_floats(value, where):
    return [parse_float(tok, where) for tok in value.split()]


def parse_ints(value, where):
    return [parse_int(tok, where) for tok in value.split()]


def parse_names(value):
    return value.split()


def parse_fields(value, where, required=(), optional=()):
    """Parse 'name:value' tokens into a dict, validating field names."""
    allowed = set(required) | set(optional)
    out = {}
    for tok in value.split():
        if ":" not in tok:
            raise ConfigError(f"{where}: expected 'name:value' field, got {tok!r}")
        name, _, val = tok.partition(":")
        if allowed and name not in allowed:
            raise ConfigError(f"{where}: unknown field {name!r}")
        if name in out:
            raise ConfigError(f"{where}: duplicate field {name!r}")
        out[name] = val
    for name in required:
        if name not in out:
            raise ConfigError(f"{where}: missing field {name!r}")
    return out
