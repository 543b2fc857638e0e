"""Quick check of the compiled extension. Run after `maturin develop` or
installing the wheel built from crates/py."""

import dcs_synth as ds

inst = ds.Instance.bundled("table1_A20_S3.json")
assert inst.num_loops == 20 and inst.levels == 3
assert ds.Instance.from_json(inst.to_json()).to_json() == inst.to_json()

status, cost, arch = ds.exact(inst)
assert status == "optimal" and cost == 1293.0, (status, cost)
assert arch.cost == cost
report = ds.validate(inst, arch)
assert report.feasible and report.violations == []

res = ds.solve(ds.Instance.bundled("table1_A1_S3.json"), seed=1)
assert res.feasible and res.best_cost == 1120.0
assert res.architecture.render().count("\n") == 3
assert res.architecture.render("dot").startswith("digraph")
assert len(res.trace_csv.splitlines()) == 21

again = ds.Architecture.from_json(arch.to_json(), inst)
assert ds.validate(inst, again).total_cost == 1293.0

none = ds.solve(ds.Instance.bundled("table1_A180_S3.json"))
assert not none.feasible and none.best_cost is None and none.architecture is None

stats, runs = ds.batch(inst, 4)
assert stats.splitlines()[0].startswith("runs,successes")
assert len(runs.splitlines()) == 5

try:
    ds.Instance.from_json('{"levels": 3}')
except ValueError as e:
    print("rejected:", e)
else:
    raise AssertionError("bad instance accepted")

print("ok:", len(ds.bundled_instances()), "bundled instances")
