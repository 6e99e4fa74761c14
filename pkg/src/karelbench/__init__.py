"""Karel DSL workbench: parser, interpreter, benchmark tasks, dataset
generation, latent-space search, and a macro-composition engine."""

__version__ = "0.1.0"
