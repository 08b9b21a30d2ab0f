"""superseg: superpixel segmentation, segmentation-quality metrics, and
a region-based semantic classification pipeline for multi-channel
raster images."""

from .raster import (UNLABELED, LabelMap, Palette, RasterImage, RegionStats,
                     Segmentation, extract_boundaries, load_image, load_labels,
                     load_palette, load_segmentation, majority_label,
                     region_stats, relabel_contiguous, save_image, save_labels,
                     save_palette, save_segmentation)
from .superpixels import (LscParams, MergeParams, QuickshiftParams, SlicParams,
                          enforce_connectivity, hswo_merge, lsc, quickshift,
                          rgb_to_lab, slic, sliding_window)
from .segeval import (SegMetricsReport, average_purity, boundary_recall,
                      oracle_accuracy, undersegmentation_error)
from .features import (DescriptorKind, FeatureSet, PatchSpec, build_samples,
                       describe_builtin, extract_patch, load_external_features,
                       resize_patch, save_features)
from .classify import (LinearModel, TrainConfig, build_semantic_map, load_model,
                       predict, predict_batch, save_model, train_svm)
from .claseval import (ConfusionMatrix, MetricUndefined, cohen_kappa, confusion,
                       f1_score, overall_accuracy)
from .synth import generate_scene

__version__ = "0.1.0"
