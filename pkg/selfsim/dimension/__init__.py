from selfsim.dimension.moran import DimensionResult, moran_residual, moran_sensitivity, similarity_dimension

__all__ = ["DimensionResult", "moran_residual", "moran_sensitivity", "similarity_dimension"]
