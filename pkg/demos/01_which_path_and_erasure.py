# %% [markdown]
# # Which-path marking and erasure
#
# An electron passes a double slit.  When it goes through the right slit it may
# emit a photon whose polarisation marks the path.  With orthogonal markers
# (|H> for the left slit, |V> for the right) the electron and photon form a
# Bell state and the loss electrons show no fringes at all.

# %%
import numpy as np

from qeraser import (
    EraserParams,
    build_joint_state,
    condition_on_photon,
    default_geometry,
    electron_state,
    fringe_visibility,
    intensity_pattern,
    photon_projector,
)
from qeraser.model import electron_state_without_photon, waveplate_projector

geometry = default_geometry()
params = EraserParams()  # a = b = 1/sqrt(2), h = 0, v = 1, gamma = 1
rho = build_joint_state(params)

print(f"fringe period     {geometry.fringe_period * 1e6:.3f} um")
print(f"first envelope 0  {geometry.first_null * 1e6:.3f} um")

# %% [markdown]
# Electrons that did not emit a photon keep their full coherence.  Electrons
# that did are entangled with the photon: tracing it out leaves a mixed
# which-path state.

# %%
v_plain = fringe_visibility(electron_state_without_photon(params))
v_loss = fringe_visibility(electron_state(rho))
print(f"no photon emitted: V = {v_plain:.3f}")
print(f"photon ignored:    V = {v_loss:.3f}")

# %% [markdown]
# Measuring the photon in the diagonal basis erases the path record.  Each
# detector port selects a sub-ensemble with perfect fringes; the two are
# shifted by half a period, so their probability-weighted sum is fringe-free
# again.

# %%
patterns = {}
for outcome in (1, -1):
    rho_e, prob = condition_on_photon(rho, photon_projector("x", outcome))
    patterns[outcome] = intensity_pattern(rho_e, geometry, normalization=prob)
    print(f"sigma_x = {outcome:+d}: p = {prob:.2f}, V = {fringe_visibility(rho_e):.3f}")

centre = np.argmin(np.abs(geometry.x_grid))
half = centre + int(round(geometry.points_per_period() / 2))
for outcome, pat in patterns.items():
    print(f"  outcome {outcome:+d}: I(0) = {pat.intensity[centre]:.3f}, I(period/2) = {pat.intensity[half]:.3f}")
total = patterns[1].scaled() + patterns[-1].scaled()
print("weighted sum of both branches equals the envelope:", np.allclose(total, patterns[1].envelope))

# %% [markdown]
# In the lab the diagonal basis is reached with a half-wave plate at pi/8 in
# front of a polarising beam splitter.  The combined projector is identical.

# %%
for outcome in (1, -1):
    same = np.allclose(waveplate_projector(np.pi / 8, outcome), photon_projector("x", outcome))
    print(f"wave plate port {outcome:+d} equals sigma_x projector: {same}")

# %% [markdown]
# Reading the photon in its H/V basis instead keeps the path information and
# each branch is a single-slit pattern.

# %%
for outcome in (1, -1):
    rho_e, prob = condition_on_photon(rho, photon_projector("z", outcome))
    which = "left" if rho_e.mat[0, 0].real > 0.5 else "right"
    print(f"sigma_z = {outcome:+d}: electron went {which}, V = {fringe_visibility(rho_e):.3f}")
