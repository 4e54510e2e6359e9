from hypothesis import strategies as st

from d4lab.tuples import make_pair


def _divisors(n):
    out = []
    k = 1
    while k * k <= n:
        if n % k == 0:
            out.extend({k, n // k})
        k += 1
    return sorted(out)


@st.composite
def d4_pairs(draw, r_max=3000):
    """A random D(4)-pair: pick r, then a divisor a of r^2 - 4 with a < b."""
    r = draw(st.integers(min_value=3, max_value=r_max))
    n = r * r - 4
    choices = [a for a in _divisors(n) if a * a < n]
    a = draw(st.sampled_from(choices))
    return make_pair(a, n // a)
