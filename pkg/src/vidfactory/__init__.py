"""Text-to-short-video pipeline: diffusion clips, retrieved audio, overlays.

The heavy subpackages (``diffusion``, ``retrieval``, ``composer``,
``media``, ``service``) are imported on demand; importing the top-level
package stays cheap so the CLI can answer ``--help`` instantly.
"""

__version__ = "0.1.0"
