import numpy as np
from hypothesis import strategies as st

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


def vectors(n, elements=finite):
    return st.lists(elements, min_size=n, max_size=n).map(np.array)


positive = st.floats(0.2, 5.0)
lambdas = st.floats(0.0, 2.0)
