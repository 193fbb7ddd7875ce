#pragma once

// Batching protocol for co-training. A stream is an infinite sequence of
// batches [d_s, d_u]; the labeled and unlabeled pools are traversed in passes,
// each pass a fresh seeded permutation. The supervised share of batch k is
//     floor((k+1) b |S| / |D|) - floor(k b |S| / |D|)
// so every batch holds floor(b|S|/|D|) or one more labeled rows.
//
// A bundle pairs two streams that see the same unlabeled rows at every step
// but walk the labeled pool in different orders.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "cotrain/data.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

struct Batch {
    Tensor x_s;                          // [b_s x d]
    std::vector<int> y_s;                // [b_s]
    Tensor x_u;                          // [b_u x d]
    std::vector<std::size_t> s_rows;     // indices into S
    std::vector<std::size_t> u_rows;     // indices into U

    std::size_t supervised() const noexcept { return y_s.size(); }
    std::size_t unsupervised() const noexcept { return u_rows.size(); }
};

/// Cycles through 0..n-1, reshuffling at the start of every pass.
class PoolCursor {
public:
    PoolCursor(std::size_t n, std::uint64_t seed);

    std::vector<std::size_t> take(std::size_t count);
    std::size_t pass() const noexcept { return pass_; }
    std::size_t pool_size() const noexcept { return order_.size(); }

private:
    void reshuffle();

    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    std::size_t pass_ = 0;
    Rng rng_;
};

/// Number of labeled rows in batch `k` of a stream.
std::size_t supervised_count(std::uint64_t k, std::size_t batch_size, std::size_t n_labeled,
                             std::size_t n_unlabeled);

class DataStream {
public:
    DataStream(std::shared_ptr<const Dataset> labeled, std::shared_ptr<const Dataset> unlabeled,
               std::size_t batch_size, std::uint64_t seed);

    Batch next();
    std::uint64_t batches_drawn() const noexcept { return step_; }

private:
    friend class StreamBundle;
    std::size_t next_supervised_count() const;
    Batch assemble(std::vector<std::size_t> u_rows);

    std::shared_ptr<const Dataset> labeled_;
    std::shared_ptr<const Dataset> unlabeled_;
    std::size_t batch_size_;
    PoolCursor labeled_cursor_;
    PoolCursor unlabeled_cursor_;
    std::uint64_t step_ = 0;
};

struct BundleBatch {
    Batch first;   // from s
    Batch second;  // from s-bar
};

/// Pair of streams sharing one unlabeled cursor.
class StreamBundle {
public:
    StreamBundle(std::shared_ptr<const Dataset> labeled, std::shared_ptr<const Dataset> unlabeled,
                 std::size_t batch_size, std::uint64_t seed);

    BundleBatch next();
    std::uint64_t seed() const noexcept { return seed_; }

private:
    DataStream first_;
    DataStream second_;
    std::uint64_t seed_;
};

/// n_views/2 independently seeded bundles. Odd or zero view counts are rejected.
std::vector<StreamBundle> make_bundles(std::shared_ptr<const Dataset> labeled,
                                       std::shared_ptr<const Dataset> unlabeled,
                                       std::size_t n_views, std::size_t batch_size,
                                       std::uint64_t seed);

}  // namespace cotrain
