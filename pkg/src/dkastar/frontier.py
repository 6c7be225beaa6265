"""A* open list over order-graph subsets.

Pops the smallest ``f = g + h``; ties go to the larger ``g`` (deeper node),
then to the smaller subset mask.  Each subset keeps its best ``g``: a push
that does not strictly improve it is ignored, and a strictly better push
reopens the subset even after it was expanded.
"""

import heapq
import math


class Frontier:
    def __init__(self):
        self._heap = []
        self.best_g = {}

    def __len__(self):
        return len(self._heap)

    def push(self, subset: int, g: float, h: float) -> bool:
        if g >= self.best_g.get(subset, math.inf):
            return False
        self.best_g[subset] = g
        heapq.heappush(self._heap, (g + h, -g, subset))
        return True

    def pop(self):
        """Next live ``(subset, g, f)``, skipping superseded entries; ``None`` when empty."""
        while self._heap:
            f, neg_g, subset = heapq.heappop(self._heap)
            if -neg_g > self.best_g[subset]:
                continue
            return subset, -neg_g, f
        return None


def expand_policy(frontier: Frontier):
    return frontier.pop()
