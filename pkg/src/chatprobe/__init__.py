"""chatprobe: converse with a text-generation backend about its own behavior.

A single backend does quadruple duty: it parses user requests into a formal
query language, performs the downstream task, generates self-explanations
(attribution, rationales, counterfactuals, augmentations), and its outputs
are rendered as templated conversational responses.
"""

__version__ = "0.1.0"
