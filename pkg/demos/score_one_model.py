"""Score a single learned structure against the network that generated it.

Walks the scoring pipeline end to end: take the built-in four-variable
benchmark as the truth, damage its structure, give the damaged structure the
best parameters it can carry (the conditionals induced by the true joint),
and ask every metric how bad the damage is.
"""
import causalkl as ck

# 1. the truth and a damaged copy -------------------------------------------
# rev.out.strong reverses B -> C, the strongest outgoing arc in the network.
truth, mutations = ck.builtin_metastatic_suite()
mutation = next(m for m in mutations if m.name == "rev.out.strong")
dag, _ = ck.apply_mutation(truth, mutation)
print("truth arcs:  ", sorted(truth.dag.arc_names()))
print("damaged arcs:", sorted(dag.arc_names()))

# 2. best-case parameters for the damaged structure -------------------------
# With unlimited data a learner would land on these conditionals exactly.
joint = ck.joint_distribution(truth)
model = ck.project_parameters(joint, dag)

# 3. structure-only scores ---------------------------------------------------
ed = ck.edit_distance(truth.dag, dag)
wd = ck.wed_d(truth, dag)
print(f"\nedit distance          {ed}")
print(f"dependence-weighted ed {wd:.4f}")

# 4. distribution scores ------------------------------------------------------
# kl ignores arc direction entirely; the intervention-aware scores do not.
c = len(truth.variables)
kl = ck.kl(joint, ck.joint_distribution(model))
print(f"kl                     {float(kl):.4f}")
for scheme in ck.InterventionScheme:
    raw = ck.ckl(scheme, truth, model)
    scale = ck.scale_factor(scheme, c)
    print(f"{scheme.value} (x{scale:g})              "
          f"{scale * float(raw):.4f}")

# 5. the decomposition behind the one-free score -----------------------------
# wed3 sums one term per variable whose incoming arcs changed, and agrees
# with the one-free divergence times the variable count.
terms, value = ck.wed3_decomposition(truth, model)
print(f"\nwed3                   {float(value):.4f}")
for term in terms:
    print(f"  {term.variable}: parents {term.truth_parents or '()'} "
          f"-> {term.model_parents or '()'}: {term.value:.4f}")
