"""The rate-based budget server.

Analysis time is limited to B units per period T.  Checks answer 1 while
budget remains; charges draw it down; at every period boundary the budget
snaps back to B with no carry-over.  An analysis call that starts with
budget left always finishes, so the worst overshoot is one call's cost.
"""

from dime import BudgetState

T, B = 10, 4
state = BudgetState(period=T, budget=B)
print(f"period T={T}, budget B={B}")
print(f"{'now':>4} {'check':>6} {'charge':>7} {'remaining':>10}")

now = 0
for step in range(18):
    ok = state.check(now)
    charged = ""
    if ok and step % 2 == 0:  # an analysis call every other unit while enabled
        state.charge(2, now)
        charged = "2"
    bar = "#" * int(state.remaining)
    print(f"{now:>4} {ok:>6} {charged:>7} {state.remaining:>10}  {bar}")
    now += 1

print("\nclosed-period instrumentation loads:", state.period_loads())

print("\novershoot: a 3-unit call admitted with only 1 unit left")
state2 = BudgetState(period=10, budget=3)
state2.charge(2, 0)
assert state2.check(1) == 1       # 1 unit left, call may start
state2.charge(3, 1)               # runs 2 units past the budget
print("  overshoot log:", state2.overshoot_log)
print("  remaining clamps to:", state2.remaining)
