"""What happens below the global-existence threshold lam = 1/(n-1)?

Nothing is guaranteed there, and the solver makes no promises either: in
exploratory mode it marches until the equation itself gives out and reports
what it saw.  Empirically the slope blows up at a finite radius r*(lam)
that shrinks as lam decreases -- at the threshold itself (lam (n-1) = 1)
the blow-up radius is still finite.  The breakdown radii printed here are
observations, not assertions.
"""

from imcfprofile import Parameters, SolverConfig
from imcfprofile.continuation import solve_profile

print(f"{'lambda':>7} {'fate by r = 50':>45}")
for lam in (0.4, 0.6, 0.8, 0.9, 1.0, 1.05, 1.2):
    params = Parameters(n=2, lam=lam, mu=-1.0)
    mode = "exploratory" if not params.global_regime else "certified"
    profile, events, _ = solve_profile(params, SolverConfig(r_max=50.0), mode=mode)
    if events:
        ev = events[-1]
        fr = ev.values.get("fr", float("nan"))
        note = f"{ev.kind} at r = {ev.r:.4f} (f_r ~ {fr:.2e})"
    else:
        note = f"reached r = {profile.r_max:g} cleanly [{mode}]"
    print(f"{lam:>7} {note:>45}")

# the certified side of the fence (lam > 1) continues forever; the
# exploratory side hits a vertical tangent at finite radius. The threshold
# case lam = 1 breaks down too -- strict inequality matters.
