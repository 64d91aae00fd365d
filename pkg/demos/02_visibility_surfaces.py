# %% [markdown]
# # Partial coherence and non-orthogonal markers
#
# Two knobs weaken the which-path record.  The overlap |h|^2 between the two
# marker polarisations leaves some fringes visible even without erasure.  The
# coherence gamma mixes the entangled state with its dephased counterpart.

# %%
import numpy as np

from qeraser import EraserParams, build_joint_state, concurrence, condition_on_photon, electron_state
from qeraser import fringe_visibility, photon_projector

gammas = np.linspace(0, 1, 6)
overlaps = np.linspace(0, 1, 6)


def table(title, fn):
    print(title)
    print("gamma\\|h|^2 " + " ".join(f"{h2:6.2f}" for h2 in overlaps))
    for g in gammas:
        cells = [fn(EraserParams.from_overlap(h2, gamma=g)) for h2 in overlaps]
        print(f"{g:10.2f}  " + " ".join(f"{c:6.3f}" for c in cells))
    print()


# %% [markdown]
# Without looking at the photon the fringe visibility is gamma |h|: it grows
# with the marker overlap and is capped by the coherence.

# %%
table("direct visibility", lambda p: fringe_visibility(electron_state(build_joint_state(p))))

# %% [markdown]
# Conditioning on the diagonal photon outcome recovers most of the contrast.
# For real markers the recovered visibility is gamma (h + v) / (1 + h v),
# which barely depends on the overlap.

# %%
def recovered(p):
    rho_e, _ = condition_on_photon(build_joint_state(p), photon_projector("x", 1))
    return fringe_visibility(rho_e)


table("recovered visibility (photon sigma_x = +1)", recovered)

# %% [markdown]
# The entanglement falls as the overlap grows.  For small overlap the
# recovered visibility follows the concurrence almost one-to-one.

# %%
table("concurrence", lambda p: concurrence(build_joint_state(p)))

pairs = []
for g in np.linspace(0, 1, 21):
    for h2 in (0.0, 0.05):
        p = EraserParams.from_overlap(h2, gamma=g)
        pairs.append((concurrence(build_joint_state(p)), recovered(p)))
c, v = np.array(pairs).T
print(f"|h|^2 < 0.1: correlation {np.corrcoef(c, v)[0, 1]:.5f}, max |V - C| = {np.max(np.abs(v - c)):.4f}")
