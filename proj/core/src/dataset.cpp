#include "minidarts/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace minidarts {

namespace {

Dataset gaussian_blobs(const DatasetSpec& spec, std::mt19937_64& rng) {
    Dataset d;
    d.input_dim = spec.input_dim;
    d.classes = spec.classes;
    // Class centers on a seeded random direction at radius 3, pairwise
    // well-separated for small class counts by orthogonalized placement.
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> centers(spec.classes,
                                             std::vector<double>(spec.input_dim));
    for (std::size_t c = 0; c < spec.classes; ++c) {
        double norm2 = 0.0;
        for (double& v : centers[c]) {
            v = unit(rng);
            norm2 += v * v;
        }
        double inv = 3.0 / std::sqrt(std::max(norm2, 1e-12));
        for (double& v : centers[c]) v *= inv;
    }
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        int label = static_cast<int>(i % spec.classes);  // every class present
        d.labels.push_back(label);
        for (std::size_t j = 0; j < spec.input_dim; ++j)
            d.features.push_back(centers[static_cast<std::size_t>(label)][j] +
                                 spec.noise * jitter(rng));
    }
    return d;
}

Dataset two_spirals(const DatasetSpec& spec, std::mt19937_64& rng) {
    if (spec.classes != 2)
        throw std::invalid_argument("two_spirals requires exactly 2 classes");
    if (spec.input_dim < 2)
        throw std::invalid_argument("two_spirals requires input_dim >= 2");
    Dataset d;
    d.input_dim = spec.input_dim;
    d.classes = 2;
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        int label = static_cast<int>(i % 2);
        double t = static_cast<double>(i / 2) / std::max<std::size_t>(spec.n / 2, 1);
        double angle = 3.0 * std::numbers::pi * t + (label == 1 ? std::numbers::pi : 0.0);
        double radius = 0.5 + 2.5 * t;
        d.labels.push_back(label);
        d.features.push_back(radius * std::cos(angle) + spec.noise * jitter(rng));
        d.features.push_back(radius * std::sin(angle) + spec.noise * jitter(rng));
        for (std::size_t j = 2; j < spec.input_dim; ++j)
            d.features.push_back(spec.noise * jitter(rng));
    }
    return d;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
    if (spec.n < 2 * spec.classes)
        throw std::invalid_argument("dataset: n must be at least 2 * classes");
    if (spec.noise < 0.0)
        throw std::invalid_argument("dataset: noise must be non-negative");
    if (spec.classes == 0 || spec.input_dim == 0)
        throw std::invalid_argument("dataset: classes and input_dim must be positive");
    std::mt19937_64 rng(spec.seed);
    if (spec.generator == "gaussian_blobs") return gaussian_blobs(spec, rng);
    if (spec.generator == "two_spirals") return two_spirals(spec, rng);
    throw std::invalid_argument("dataset: unknown generator " + spec.generator);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& data, std::uint64_t seed) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t half = data.size() / 2;
    auto take = [&](std::size_t begin, std::size_t end) {
        Dataset part;
        part.input_dim = data.input_dim;
        part.classes = data.classes;
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t row = order[i];
            part.labels.push_back(data.labels[row]);
            for (std::size_t j = 0; j < data.input_dim; ++j)
                part.features.push_back(data.features[row * data.input_dim + j]);
        }
        return part;
    };
    return {take(0, half), take(half, data.size())};
}

}  // namespace minidarts
