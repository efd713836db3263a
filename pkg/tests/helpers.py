"""Small stand-ins shared by the engine and acceptance tests."""

from stategen.model import StateSchema, TransitionSpec


class Stub(TransitionSpec):
    """A stateless transition that always applies and changes nothing."""

    def __init__(self, name):
        self.name = name
        self.doc = name

    def candidates(self, schema):
        return [{}]

    def effect(self, schema, bindings):
        pass


def stub_candidates(*names):
    return [(Stub(n), {}) for n in names]


def empirical(picks, keys):
    return {k: sum(p == k for p in picks) / len(picks) for k in keys}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys)


EMPTY = StateSchema()


ACCEPTANCE: dict[int, str] = {}


def report_criterion(n, ok, detail):
    """Record and print a PASS/FAIL line, then fail the test if needed."""
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line
