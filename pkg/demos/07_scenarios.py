"""Running bundled scenarios through the library API (the `catenary` command
does the same from the shell).
"""

# %%
import tempfile

from catenary.scenario import bundled, orbit_export, run_scenario, verify_suite

out = tempfile.mkdtemp()
rep = run_scenario(bundled("saddle_bvp.json"), out)
for c in rep.checks:
    print(f"{c.name:<26} {float(c.value):.3e}  tol {c.tolerance:.0e}  {'ok' if c.passed else 'FAIL'}")

# %% a deliberately broken field reports where it fails
bad = run_scenario(bundled("corrupted_sum.json"))
print("corrupted exit code:", bad.exit_code, " witness:", bad.witness()["witness"]["point"])

# %% the whole suite and an orbit trace
res = verify_suite(bundled("suite.json"), out)
print(res.table())
print("trace:", orbit_export(bundled("saddle_sum.json"), out))
