"""Published benchmark values used for layout-parity golden tests.

Match rates are stored as fractions in [0, 1]; the renderer turns MAD rows
into percentages. These numbers exercise the report layout only; nothing in
the package derives them.
"""

from morphlab import MetricCell, MetricsReport, Provenance
from morphlab.report import POLARITY_WARNING, bpcer_op_label

# morph type -> model -> (MMPMR100, MMPMR1000)
VULNERABILITY_VALUES = {
    "OpenCV": {
        "ElasticFace": (0.997, 0.980),
        "CurricularFace": (0.996, 0.986),
        "MixFaceNet": (0.996, 0.963),
        "PocketNet": (0.996, 0.970),
    },
    "FaceMorpher": {
        "ElasticFace": (0.962, 0.913),
        "CurricularFace": (0.970, 0.935),
        "MixFaceNet": (0.972, 0.931),
        "PocketNet": (0.979, 0.941),
    },
    "WebMorph": {
        "ElasticFace": (0.990, 0.986),
        "CurricularFace": (0.988, 0.988),
        "MixFaceNet": (0.988, 0.984),
        "PocketNet": (0.988, 0.988),
    },
    "MIPGAN-I": {
        "ElasticFace": (0.980, 0.845),
        "CurricularFace": (0.962, 0.890),
        "MixFaceNet": (0.981, 0.887),
        "PocketNet": (0.991, 0.900),
    },
    "MIPGAN-II": {
        "ElasticFace": (0.953, 0.778),
        "CurricularFace": (0.953, 0.832),
        "MixFaceNet": (0.973, 0.836),
        "PocketNet": (0.977, 0.857),
    },
    "MorDIFF": {
        "ElasticFace": (0.990, 0.948),
        "CurricularFace": (0.995, 0.968),
        "MixFaceNet": (0.992, 0.958),
        "PocketNet": (0.996, 0.949),
    },
}

MODELS = ("ElasticFace", "CurricularFace", "MixFaceNet", "PocketNet")
MORPH_TYPES = ("OpenCV", "FaceMorpher", "WebMorph", "MIPGAN-I", "MIPGAN-II", "MorDIFF")

# (mad backbone, training set) -> test morph type -> (EER, APCER@1%, @10%, @20%)
# all values are percentages here, converted to fractions below
DETECTABILITY_VALUES = {
    ("MixFaceNet-MAD", "SMDD"): {
        "FaceMorph": (4.60, 5.50, 3.60, 2.90),
        "MIPGAN_I": (16.70, 75.80, 22.20, 14.50),
        "MIPGAN_II": (20.62, 81.58, 32.03, 20.62),
        "OpenCV": (8.33, 36.38, 6.50, 3.76),
        "WebMorph": (18.20, 74.00, 24.00, 17.60),
        "MorphDiffusion": (8.50, 33.40, 7.40, 4.10),
    },
    ("MixFaceNet-MAD", "LMAD-DRD"): {
        "FaceMorph": (5.60, 11.20, 3.30, 1.20),
        "MIPGAN_I": (14.40, 64.90, 19.80, 7.70),
        "MIPGAN_II": (11.51, 48.65, 13.51, 4.30),
        "OpenCV": (16.37, 72.46, 25.61, 12.09),
        "WebMorph": (21.60, 82.80, 46.60, 23.80),
        "MorphDiffusion": (21.40, 81.60, 43.90, 22.30),
    },
    ("MixFaceNet-MAD", "MorGAN-LMA"): {
        "FaceMorph": (8.00, 13.90, 7.30, 0.00),
        "MIPGAN_I": (14.60, 93.00, 30.40, 0.00),
        "MIPGAN_II": (18.92, 93.19, 34.33, 0.00),
        "OpenCV": (9.86, 78.76, 13.41, 0.00),
        "WebMorph": (15.80, 92.40, 34.00, 0.00),
        "MorphDiffusion": (13.50, 89.30, 27.20, 0.00),
    },
    ("Inception-MAD", "SMDD"): {
        "FaceMorph": (0.00, 1.70, 0.00, 0.00),
        "MIPGAN_I": (10.90, 50.90, 13.70, 5.70),
        "MIPGAN_II": (16.22, 82.48, 25.83, 11.41),
        "OpenCV": (7.52, 28.66, 5.49, 3.05),
        "WebMorph": (18.00, 85.20, 27.40, 13.40),
        "MorphDiffusion": (5.30, 17.20, 3.50, 2.50),
    },
    ("Inception-MAD", "LMAD-DRD"): {
        "FaceMorph": (61.00, 99.90, 99.60, 97.40),
        "MIPGAN_I": (41.30, 99.60, 89.50, 70.40),
        "MIPGAN_II": (39.74, 99.60, 88.19, 63.37),
        "OpenCV": (8.84, 40.96, 8.23, 2.13),
        "WebMorph": (20.20, 85.60, 41.00, 17.00),
        "MorphDiffusion": (95.40, 100.00, 100.00, 100.00),
    },
    ("Inception-MAD", "MorGAN-LMA"): {
        "FaceMorph": (0.80, 0.70, 0.00, 0.00),
        "MIPGAN_I": (46.10, 98.70, 89.20, 78.00),
        "MIPGAN_II": (35.84, 96.80, 74.28, 56.26),
        "OpenCV": (9.34, 45.43, 9.25, 2.95),
        "WebMorph": (19.00, 70.00, 31.80, 18.40),
        "MorphDiffusion": (26.50, 87.00, 53.10, 32.50),
    },
}

BPCER_TARGETS = (0.01, 0.10, 0.20)

_PROVENANCE = Provenance(tool="morphlab 0.1.0", parameters=(("source", "published-values"),))


def vulnerability_report() -> MetricsReport:
    cells = []
    for model in MODELS:
        for morph_type in MORPH_TYPES:
            m100, m1000 = VULNERABILITY_VALUES[morph_type][model]
            cells.append(MetricCell(model, morph_type, "MMPMR", "MMPMR100", m100))
            cells.append(MetricCell(model, morph_type, "MMPMR", "MMPMR1000", m1000))
    return MetricsReport(kind="vulnerability", cells=tuple(cells), provenance=_PROVENANCE)


def detectability_report() -> MetricsReport:
    cells = []
    for (backbone, train_set), rows in DETECTABILITY_VALUES.items():
        model = f"{backbone}/{train_set}"
        for morph_type, (eer_pct, *apcers) in rows.items():
            flags = (POLARITY_WARNING,) if eer_pct > 50.0 else ()
            cells.append(
                MetricCell(model, morph_type, "EER", "", eer_pct / 100.0, flags=flags)
            )
            for target, value in zip(BPCER_TARGETS, apcers):
                cells.append(
                    MetricCell(
                        model, morph_type, "APCER", bpcer_op_label(target), value / 100.0
                    )
                )
    return MetricsReport(kind="mad", cells=tuple(cells), provenance=_PROVENANCE)
