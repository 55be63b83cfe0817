"""How reconstruction losses turn into sample weights.

Run: python demos/weights_from_losses.py
"""
import numpy as np

from rmsc import WeightRegularizer

reg = WeightRegularizer(gamma=1e-5)

# sigma(l) = 1/sqrt(gamma + l): a sample that reconstructs badly is trusted less
losses = np.array([0.0, 1e-4, 0.01, 0.1, 1.0, 10.0])
for ell, p in zip(losses, reg.minimizer(losses)):
    print(f"loss {ell:8.4f} -> weight {p:10.4f}")

# the weight is the argmin of p*l + psi(p); check it on a grid for one loss
ell = 0.25
grid = np.geomspace(1e-2, 1e2, 100_001)
best = grid[np.argmin(grid * ell + reg.psi(grid))]
print(f"\ngrid argmin {best:.5f}, closed form {reg.minimizer(ell):.5f}")
print(f"latent loss at l={ell}: {reg.latent_loss(ell):.6f}")

# larger gamma caps the weight of perfectly reconstructed samples at 1/sqrt(gamma)
for gamma in (1e-5, 1e-2, 1.0):
    print(f"gamma {gamma:g}: weight at zero loss = {WeightRegularizer(gamma).minimizer(0.0):.2f}")
