#include "teleop/learners/kmeans.hpp"

#include <limits>

#include "teleop/common.hpp"
#include "teleop/learners/nn_core.hpp"
#include "teleop/rng.hpp"

namespace teleop::learn {

namespace {

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& p,
                     double* dist_sq = nullptr) {
    int best = 0;
    double best_d = (centroids.row(0) - p).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist_sq) *dist_sq = best_d;
    return best;
}

}  // namespace

void KMeansModel::fit(const Eigen::MatrixXd& points, const KMeansConfig& cfg, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    const int k = cfg.k;
    if (n < k) throw DataError("k-means: fewer points than clusters");

    Rng rng(seed);
    centroids_.resize(k, points.cols());

    // Distance-weighted seeding.
    centroids_.row(0) = points.row(static_cast<Eigen::Index>(rng.uniform_index(
        static_cast<std::size_t>(n))));
    Eigen::VectorXd d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < c; ++j) {
                best = std::min(best, (centroids_.row(j) - points.row(i)).squaredNorm());
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centroids_.row(c) =
                points.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));
            continue;
        }
        double target = rng.uniform() * total;
        Eigen::Index pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids_.row(c) = points.row(pick);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    inertia_history_.clear();
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // Assignment step.
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = 0.0;
            const int c = nearest_centroid(centroids_, points.row(i), &d);
            if (c != labels[static_cast<std::size_t>(i)]) {
                labels[static_cast<std::size_t>(i)] = c;
                changed = true;
            }
            inertia += d;
        }
        inertia_history_.push_back(inertia);
        inertia_ = inertia;
        if (!changed) break;

        // Update step.
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centroids_.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Reseed an empty cluster to the point farthest from its centroid.
                double worst = -1.0;
                Eigen::Index pick = 0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d =
                        (points.row(i) - centroids_.row(labels[static_cast<std::size_t>(i)]))
                            .squaredNorm();
                    if (d > worst) {
                        worst = d;
                        pick = i;
                    }
                }
                centroids_.row(c) = points.row(pick);
            }
        }
    }
    train_labels_ = labels;
    trained_ = true;
}

std::vector<int> KMeansModel::assign(const Eigen::MatrixXd& points) const {
    if (!trained_) throw DataError("k-means model is not trained");
    std::vector<int> labels(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        labels[static_cast<std::size_t>(i)] = nearest_centroid(centroids_, points.row(i));
    }
    return labels;
}

nlohmann::json KMeansModel::save() const {
    return {{"centroids", matrix_to_json(centroids_)}, {"inertia", inertia_}};
}

void KMeansModel::load(const nlohmann::json& j) {
    centroids_ = matrix_from_json(j.at("centroids"));
    inertia_ = j.at("inertia").get<double>();
    trained_ = true;
}

}  // namespace teleop::learn
