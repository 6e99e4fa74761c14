"""Learning stack on top of the karelbench core.

Modules: ``bindings`` (environment handles, tensor export, and the frozen
token vocabulary), ``grammar`` (token-level validity automaton used for
masked decoding), ``models``/``losses``/``train`` (program-embedding VAE
and neural executor), ``meta`` (latent-action meta-policy), and
``experiments`` (desk-scale result drivers).
"""

__version__ = "0.1.0"
