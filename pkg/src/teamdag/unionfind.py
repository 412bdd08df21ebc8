class UnionFind:
    """Disjoint sets over arbitrary hashable items, with path halving and union by size."""

    def __init__(self, items=()):
        self.parent = {}
        self.size = {}
        for x in items:
            self.add(x)

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def union_all(self, xs):
        it = iter(xs)
        first = next(it, None)
        if first is None:
            return
        for x in it:
            self.union(first, x)

    def groups(self):
        """Components as lists, ordered by their smallest member; members sorted."""
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        comps = [sorted(g) for g in out.values()]
        comps.sort(key=lambda g: g[0])
        return comps
