"""Infrastructure layer package."""
from safedepth.infrastructure.alignment import (
    AffineAligner,
    apply_affine,
    fit_scale_shift,
    fit_scale_shift_frames,
)
from safedepth.infrastructure.catalog import DatasetCatalog, load_catalog, parse_catalog
from safedepth.infrastructure.dataset_layout import (
    DirectorySampleSource,
    SampleRef,
    discover_samples,
    load_sample,
)
from safedepth.infrastructure.densification import (
    DensifyMethod,
    SkyMaskingPreparer,
    densify,
    mask_sky,
)
from safedepth.infrastructure.feature_extractors import (
    BorderFollowingEdgeExtractor,
    CornerExtractor,
    FeatureExtractorFactory,
    UnionExtractor,
    extract_corners,
    extract_edges,
    trace_borders,
)
from safedepth.infrastructure.raster_io import (
    FileRasterReader,
    FileRasterWriter,
    read_depth,
    read_depth_f32,
    read_depth_png16,
    read_labels_png,
    read_name_table,
    read_rgb,
    write_depth,
    write_depth_f32,
    write_depth_png16,
    write_labels_png,
    write_name_table,
    write_rgb,
)
from safedepth.infrastructure.weight_tables import (
    GIDAS_WEIGHTS,
    builtin_gidas_table,
    default_mapping,
    load_weight_table,
    parse_weight_table,
)

__all__ = [
    "AffineAligner",
    "apply_affine",
    "fit_scale_shift",
    "fit_scale_shift_frames",
    "DatasetCatalog",
    "load_catalog",
    "parse_catalog",
    "DirectorySampleSource",
    "SampleRef",
    "discover_samples",
    "load_sample",
    "DensifyMethod",
    "SkyMaskingPreparer",
    "densify",
    "mask_sky",
    "BorderFollowingEdgeExtractor",
    "CornerExtractor",
    "FeatureExtractorFactory",
    "UnionExtractor",
    "extract_corners",
    "extract_edges",
    "trace_borders",
    "FileRasterReader",
    "FileRasterWriter",
    "read_depth",
    "read_depth_f32",
    "read_depth_png16",
    "read_labels_png",
    "read_name_table",
    "read_rgb",
    "write_depth",
    "write_depth_f32",
    "write_depth_png16",
    "write_labels_png",
    "write_name_table",
    "write_rgb",
    "GIDAS_WEIGHTS",
    "builtin_gidas_table",
    "default_mapping",
    "load_weight_table",
    "parse_weight_table",
]
