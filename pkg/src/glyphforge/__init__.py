"""glyphforge: a self-contained handwritten-digit OCR training and
evaluation toolkit — box-file ground truth, glyph segmentation, prototype
training, dictionary automata, nearest-prototype recognition with
rejection, and accuracy reports over known/unknown-writer splits."""

__version__ = "0.1.0"
