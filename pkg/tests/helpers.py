"""Independent oracles used to check the library's similarity arithmetic.

These deliberately re-derive results by enumeration rather than calling
back into the code paths under test.
"""

import itertools

from semmatch import Taxonomy


def optimal_assignment_score(tokens_a, tokens_b, sim) -> float:
    """Brute-force maximum over all injective token pairings, normalized."""
    if not tokens_a and not tokens_b:
        return 1.0
    if not tokens_a or not tokens_b:
        return 0.0
    if len(tokens_a) <= len(tokens_b):
        small, large = tokens_a, tokens_b
        score = lambda i, j: sim(small[i], large[j])
    else:
        small, large = tokens_b, tokens_a
        score = lambda i, j: sim(large[j], small[i])
    best = 0.0
    for perm in itertools.permutations(range(len(large)), len(small)):
        total = sum(score(i, j) for i, j in enumerate(perm))
        if total > best:
            best = total
    return best / max(len(tokens_a), len(tokens_b))


def max_sense_similarity(tax: Taxonomy, word1: str, word2: str, measure: str) -> float:
    """Plain double loop over sense pairs, the contract for in-vocabulary words."""
    best = 0.0
    for s1 in tax.senses_of(word1):
        for s2 in tax.senses_of(word2):
            value = tax.sense_similarity(s1, s2, measure).value
            if value > best:
                best = value
    return best


def camel_join(words) -> str:
    """Build a CamelCase label whose tokenization recovers the words."""
    return "".join(w.capitalize() for w in words)
