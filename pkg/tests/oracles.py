"""Independent reference implementations used to cross-check the aggregation
rules. Deliberately coded with different structure than the library paths:
the greedy reference rescans for the best affordable project each round with
integer cross-multiplied score comparisons, the equal-shares reference prices
each project by brute force over every possible count of exhausted payers,
and the rank-distance reference counts discordant pairs directly.
"""

from __future__ import annotations

from fractions import Fraction


def greedy_reference(totals: dict[str, int], costs: dict[str, int], budget: int) -> list[str]:
    remaining = budget
    candidates = {p for p, t in totals.items() if t > 0}
    funded: list[str] = []
    while True:
        best = None
        for p in sorted(candidates):
            if costs[p] > remaining:
                continue
            if best is None:
                best = p
                continue
            # totals[p]/costs[p] > totals[best]/costs[best], exactly
            lhs = totals[p] * costs[best]
            rhs = totals[best] * costs[p]
            if lhs > rhs:
                best = p
        if best is None:
            break
        funded.append(best)
        remaining -= costs[best]
        candidates.discard(best)
    return funded


def _price_project(cost: int, budgets: list[Fraction]) -> Fraction | None:
    """Max per-supporter payment rho with sum(min(rho, b_i)) == cost, found by
    trying every possible number of exhausted payers; None if unaffordable."""
    if sum(budgets) < cost:
        return None
    ordered = sorted(budgets)
    n = len(ordered)
    for exhausted in range(n):
        payers = n - exhausted
        rho = Fraction(cost - sum(ordered[:exhausted]), payers)
        # verify the candidate by direct summation
        if sum(min(rho, b) for b in ordered) == cost:
            return rho
    return None


def mes_reference(
    approvers: dict[str, list[int]], costs: dict[str, int], budget: int, n_voters: int
) -> tuple[list[str], dict[int, Fraction]]:
    """Brute-force-priced method of equal shares over approval ballots."""
    share = {i: Fraction(budget, n_voters) for i in range(n_voters)}
    paid = {i: Fraction(0) for i in range(n_voters)}
    pool = {p for p, sup in approvers.items() if sup}
    funded: list[str] = []
    while True:
        priced: list[tuple[Fraction, str]] = []
        for p in sorted(pool):
            rho = _price_project(costs[p], [share[i] for i in approvers[p]])
            if rho is not None:
                priced.append((rho, p))
        if not priced:
            break
        priced.sort(key=lambda item: (item[0], item[1]))
        rho, winner = priced[0]
        for i in approvers[winner]:
            pay = rho if share[i] > rho else share[i]
            share[i] -= pay
            paid[i] += pay
        funded.append(winner)
        pool.discard(winner)
    return funded, paid


def kendall_pairs(order_a: list[str], order_b: list[str]) -> int:
    """Discordant-pair count between two orderings of the same elements."""
    assert sorted(order_a) == sorted(order_b)
    pos_a = {x: i for i, x in enumerate(order_a)}
    pos_b = {x: i for i, x in enumerate(order_b)}
    items = list(order_a)
    discordant = 0
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            x, y = items[i], items[j]
            same = (pos_a[x] < pos_a[y]) == (pos_b[x] < pos_b[y])
            if not same:
                discordant += 1
    return discordant


def borda_reference(orders: list[list[str]], universe: list[str]) -> dict[str, int]:
    scores = {p: 0 for p in universe}
    for order in orders:
        k = len(order)
        for i, p in enumerate(order):
            scores[p] += (k - 1) - i
    return scores
