"""
Trusting deliberate choices more
================================

With bias b > 1, items the user picked unaided weigh b times as much.
bias_scope="score" applies the weight only when summing a user's profile;
"everywhere" also uses it in the similarity counts.  Only the latter moves
the cn jump to a clearly lower phi.
"""

from recloop import WorldConfig, run

base = WorldConfig(n_users=300, n_items=100, n_genres=10, k=7, updates_per_user=4000)

for phi in (0.5, 0.6, 0.7):
    plain = run(base.replace(phi=phi), with_auc=False).omega
    score = run(base.replace(phi=phi, bias=2.0), with_auc=False).omega
    everywhere = run(base.replace(phi=phi, bias=2.0, bias_scope="everywhere"), with_auc=False).omega
    print(f"phi={phi}: omega b=1 {plain:.3f}   b=2 score {score:.3f}   b=2 everywhere {everywhere:.3f}")
