#ifndef MINIDARTS_DATASET_HPP
#define MINIDARTS_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace minidarts {

struct Dataset {
    std::size_t input_dim = 0;
    std::size_t classes = 0;
    std::vector<double> features;  // row-major, n x input_dim
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

struct DatasetSpec {
    std::string generator = "gaussian_blobs";  // or "two_spirals"
    std::size_t n = 1000;
    std::size_t classes = 2;
    std::size_t input_dim = 8;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

// Deterministic given the seed; every label class is present.
// Throws std::invalid_argument when n < 2 * classes, noise < 0, or the
// generator name is unknown (two_spirals additionally requires classes == 2
// and input_dim >= 2).
Dataset generate_dataset(const DatasetSpec& spec);

// 50/50 split after a seeded shuffle; first half train, second half val.
std::pair<Dataset, Dataset> split_train_val(const Dataset& data, std::uint64_t seed);

}  // namespace minidarts

#endif
