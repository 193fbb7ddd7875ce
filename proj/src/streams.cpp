#include "cotrain/streams.hpp"

#include <algorithm>
#include <numeric>

#include "cotrain/error.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

PoolCursor::PoolCursor(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (n > 0) std::shuffle(order_.begin(), order_.end(), rng_);
}

void PoolCursor::reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
    ++pass_;
}

std::vector<std::size_t> PoolCursor::take(std::size_t count) {
    std::vector<std::size_t> out;
    if (order_.empty()) return out;
    out.reserve(count);
    while (out.size() < count) {
        if (pos_ == order_.size()) reshuffle();
        out.push_back(order_[pos_++]);
    }
    return out;
}

std::size_t supervised_count(std::uint64_t k, std::size_t batch_size, std::size_t n_labeled,
                             std::size_t n_unlabeled) {
    const std::uint64_t total = n_labeled + n_unlabeled;
    if (total == 0) return 0;
    const std::uint64_t per = static_cast<std::uint64_t>(batch_size) * n_labeled;
    return static_cast<std::size_t>(((k + 1) * per) / total - (k * per) / total);
}

DataStream::DataStream(std::shared_ptr<const Dataset> labeled,
                       std::shared_ptr<const Dataset> unlabeled, std::size_t batch_size,
                       std::uint64_t seed)
    : labeled_(std::move(labeled)),
      unlabeled_(std::move(unlabeled)),
      batch_size_(batch_size),
      labeled_cursor_(labeled_ ? labeled_->size() : 0, derive_seed(seed, 0)),
      unlabeled_cursor_(unlabeled_ ? unlabeled_->size() : 0, derive_seed(seed, 1)) {
    if (!labeled_ || labeled_->size() == 0) throw ConfigError("stream: labeled pool is empty");
    if (!labeled_->fully_labeled()) throw ConfigError("stream: labeled pool has unlabeled rows");
    if (batch_size_ == 0) throw ConfigError("stream: batch_size must be positive");
}

std::size_t DataStream::next_supervised_count() const {
    return supervised_count(step_, batch_size_, labeled_->size(),
                            unlabeled_ ? unlabeled_->size() : 0);
}

Batch DataStream::assemble(std::vector<std::size_t> u_rows) {
    Batch batch;
    batch.s_rows = labeled_cursor_.take(next_supervised_count());
    batch.x_s = labeled_->features.gather_rows(batch.s_rows);
    for (auto r : batch.s_rows) batch.y_s.push_back(*labeled_->labels[r]);
    if (!u_rows.empty()) batch.x_u = unlabeled_->features.gather_rows(u_rows);
    batch.u_rows = std::move(u_rows);
    ++step_;
    return batch;
}

Batch DataStream::next() {
    const auto n_sup = next_supervised_count();
    return assemble(unlabeled_cursor_.take(batch_size_ - n_sup));
}

StreamBundle::StreamBundle(std::shared_ptr<const Dataset> labeled,
                           std::shared_ptr<const Dataset> unlabeled, std::size_t batch_size,
                           std::uint64_t seed)
    : first_(labeled, unlabeled, batch_size, derive_seed(seed, 0)),
      second_(labeled, unlabeled, batch_size, derive_seed(seed, 1)),
      seed_(seed) {}

BundleBatch StreamBundle::next() {
    // Both streams sit on the same step, so their supervised counts agree; the
    // unlabeled rows come from the first stream's cursor and are shared.
    const auto n_sup = first_.next_supervised_count();
    auto u_rows = first_.unlabeled_cursor_.take(first_.batch_size_ - n_sup);
    BundleBatch out;
    out.second = second_.assemble(u_rows);
    out.first = first_.assemble(std::move(u_rows));
    return out;
}

std::vector<StreamBundle> make_bundles(std::shared_ptr<const Dataset> labeled,
                                       std::shared_ptr<const Dataset> unlabeled,
                                       std::size_t n_views, std::size_t batch_size,
                                       std::uint64_t seed) {
    if (n_views < 2 || n_views % 2 != 0) {
        throw ConfigError("n_views must be an even number >= 2, got " + std::to_string(n_views));
    }
    std::vector<StreamBundle> bundles;
    for (std::size_t i = 0; i < n_views / 2; ++i) {
        bundles.emplace_back(labeled, unlabeled, batch_size, derive_seed(seed, 1000 + i));
    }
    return bundles;
}

}  // namespace cotrain
