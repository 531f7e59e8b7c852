#include "pcis/knn.hpp"

#include "pcis/kdtree.hpp"

#include <cmath>
#include <sstream>

namespace pcis {

KnnGraph build_knn_graph(const Mat& coords, int k) {
  const int n = static_cast<int>(coords.rows());
  if (k < 1) throw DataError("build_knn_graph: k must be >= 1");
  if (n <= k) {
    std::ostringstream os;
    os << "build_knn_graph: need at least k+1 = " << k + 1 << " points, got " << n;
    throw DataError(os.str());
  }
  if (!coords.allFinite()) throw DataError("build_knn_graph: non-finite coordinates");

  const KdTree tree(coords);
  KnnGraph graph;
  graph.k = k;
  graph.neighbors.resize(n, k);
  for (int i = 0; i < n; ++i) {
    const std::vector<int> nn = tree.nearest(coords.row(i).transpose(), k, i);
    for (int m = 0; m < k; ++m) graph.neighbors(i, m) = nn[m];
  }
  return graph;
}

}  // namespace pcis
