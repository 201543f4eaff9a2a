"""Number formatting shared by reports and files: 15 significant digits."""
import re

_EXP = re.compile(r"e([+-])0*(\d)")


def fmt(x):
    """15 significant digits, exponent without zero padding (1e-5, not 1e-05)."""
    return _EXP.sub(r"e\1\2", f"{x:.15g}")


def fmt_complex(z):
    z = complex(z)
    if z.imag == 0:
        return fmt(z.real)
    if z.real == 0:
        return f"{fmt(z.imag)}j"
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"
