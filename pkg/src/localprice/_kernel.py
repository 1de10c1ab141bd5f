"""Compiled sweep kernel.  Mirrors ``model.select_pair`` + ``model.interact`` draw for draw."""

from numba import njit

from .rng import nb_bit, nb_index, nb_uniform


@njit(nogil=True, cache=True)
def run_steps(spins, prices, deltas, cumulative, rng_state, n_steps):
    n = spins.shape[0]
    n_entries = cumulative.shape[0]
    total = cumulative[n_entries - 1]
    for _ in range(n_steps):
        i = nb_index(rng_state, n)
        target = nb_uniform(rng_state) * total
        k = 0
        while k < n_entries - 1 and not (target < cumulative[k]):
            k += 1
        j = (i + deltas[k]) % n
        si = spins[i]
        if si == spins[j]:
            prices[i] += si
            prices[j] += si
        else:
            spins[i] = 1 if nb_bit(rng_state) else -1
            spins[j] = 1 if nb_bit(rng_state) else -1

