"""Published parity-check polynomial sets for rate-2/3 trellis codes.

Octal triples (h0, h1, h2) per memory order nu, for one-dimensional 8-level
amplitude modulation with set partitioning. Transcribed from G. Ungerboeck,
"Channel coding with multilevel/phase signals", IEEE Trans. Inf. Theory,
vol. 28, no. 1, Jan. 1982 (parity-check coefficients for one-dimensional
modulation; h2 = 0 means the second input bit rides uncoded on parallel
edges). Treat these as configuration data, not code.
"""

from .tbcc import ConvCodeSpec

AM8_TABLE = {
    3: ("13", "04", "00"),
    4: ("23", "04", "00"),
    5: ("45", "10", "00"),
    6: ("103", "024", "000"),
    7: ("235", "126", "000"),
}


def standard_code(nu: int) -> ConvCodeSpec:
    """The shipped rate-2/3 code with 2^nu states."""
    if nu not in AM8_TABLE:
        raise KeyError(f"no shipped code with nu={nu}; have {sorted(AM8_TABLE)}")
    return ConvCodeSpec.from_octal(2, nu, AM8_TABLE[nu])
