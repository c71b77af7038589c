#pragma once

#include <vector>

#include "nthp/mask.hpp"

namespace nthp {

// Tensor roles in the mask head: a bank of K shared basis maps over the
// image (K x H x W), the per-cell K-vectors weighting them (K x S x S) and
// the per-cell class probabilities (C x S x S, values in [0,1]).
using PrototypeBank = DenseMap;
using CoefficientGrid = DenseMap;
using CategoryGrid = DenseMap;

// Mask candidate flowing through the grouping pipeline: a nonempty binary
// mask, its category id and a confidence in [0,1].
struct ScoredInstance {
    BinaryMask mask;
    int category = 0;
    double score = 0.0;
};

// Soft instance masks as a sigmoid of a single matrix multiplication:
// out[i*S+j, y, x] = sigmoid( sum_k coefficients[k,i,j] * prototypes[k,y,x] ).
//
// The output is (S*S) x H x W. The dot product runs over k in ascending
// order so results are bit-reproducible; cells whose coefficient column is
// identically zero skip the accumulation and produce the exact
// sigmoid(0) = 0.5 plane.
DenseMap combine_masks(const PrototypeBank& prototypes, const CoefficientGrid& coefficients);

// Mean soft-mask probability over the pixels above the threshold; 0 when no
// pixel clears it.
double segmentation_score(const DenseMap& soft, double threshold);

// Turns a category grid plus synthesized soft masks into scored candidates.
// Per cell: category = argmax over C (ties to the lowest index), score =
// category score times the segmentation score, mask = the soft mask
// binarized at binarize_threshold. Cells whose binary mask is empty are
// dropped. Output order is row-major over cells.
std::vector<ScoredInstance> extract_candidates(const CategoryGrid& category_scores,
                                               const DenseMap& masks, double binarize_threshold);

} // namespace nthp
