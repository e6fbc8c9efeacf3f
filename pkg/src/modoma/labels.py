"""Bijective base-26 letter labels: A..Z, AA, AB, ... (lowercase for values)."""


def capital_label(i: int) -> str:
    if i < 0:
        raise ValueError("label index must be >= 0")
    out = []
    i += 1
    while i > 0:
        i, rem = divmod(i - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def lower_label(i: int) -> str:
    return capital_label(i).lower()
