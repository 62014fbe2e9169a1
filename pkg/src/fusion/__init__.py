# -*- coding: utf-8 -*-
"""
Fusion catching constructions on perfect binary trees, verified at finite depth.
"""

from .catch import CatchResult, catch_single, verify_catch
from .codes import InterleavedProductCode, TableCode, TransducerCode, WrappedProductCode
from .product_catch import EDFamily, ProductCondition, catch_product, greedy_med_stage, verify_product_catch
from .trees import SkeletonTree, full_tree
