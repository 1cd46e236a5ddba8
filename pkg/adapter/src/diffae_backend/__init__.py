"""External morph backend wrapping a diffusion autoencoder.

Serves encode/decode jobs written by the morphlab orchestrator: encoding maps
a face image to a semantic latent plus a DDIM-inverted stochastic latent,
decoding turns a composed latent pair back into an image. All interpolation
stays on the orchestrator side; this package only moves images across the
latent boundary.
"""

__version__ = "0.1.0"
