#ifndef RELCOMP_TYPES_H_
#define RELCOMP_TYPES_H_

#include <Eigen/Dense>

namespace relcomp {

// Instances are rows; features are columns.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureRow = Eigen::Ref<const Eigen::RowVectorXd>;

}  // namespace relcomp

#endif  // RELCOMP_TYPES_H_
