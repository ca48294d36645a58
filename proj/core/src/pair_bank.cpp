#include "ppgt/pair_bank.hpp"

#include <string>

#include "ppgt/tensor.hpp"

namespace ppgt {
namespace {

const EdgeList kCycle6 = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}};
const EdgeList kTwoTriangles = {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
// kCycle6 relabeled by 0->3, 1->0, 2->4, 3->1, 4->5, 5->2.
const EdgeList kCycle6Relabeled = {{0, 3}, {0, 4}, {1, 4}, {1, 5}, {2, 3}, {2, 5}};

const EdgeList kTwoSquaresSharingEdge = {{0, 1}, {0, 3}, {0, 5}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
const EdgeList kBridgedTriangles = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {3, 5}, {4, 5}};

const EdgeList kDecalin = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5},
                           {0, 6}, {6, 7}, {7, 8}, {8, 9}, {5, 9}};
const EdgeList kBicyclopentyl = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 5},
                                 {5, 6}, {6, 7}, {7, 8}, {8, 9}, {5, 9}};

const EdgeList kPrism = {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}, {2, 5}};
const EdgeList kK33 = {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}};

// Z4 x Z4, node 4r + c, adjacent when the difference is +-(0,1), +-(1,0) or +-(1,1).
const EdgeList kShrikhande = {
    {0, 1},   {0, 3},   {0, 4},   {0, 5},   {0, 12},  {0, 15},  {1, 2},   {1, 5},
    {1, 6},   {1, 12},  {1, 13},  {2, 3},   {2, 6},   {2, 7},   {2, 13},  {2, 14},
    {3, 4},   {3, 7},   {3, 14},  {3, 15},  {4, 5},   {4, 7},   {4, 8},   {4, 9},
    {5, 6},   {5, 9},   {5, 10},  {6, 7},   {6, 10},  {6, 11},  {7, 8},   {7, 11},
    {8, 9},   {8, 11},  {8, 12},  {8, 13},  {9, 10},  {9, 13},  {9, 14},  {10, 11},
    {10, 14}, {10, 15}, {11, 12}, {11, 15}, {12, 13}, {12, 15}, {13, 14}, {14, 15}};

// 4x4 grid, node 4r + c, adjacent when in the same row or column.
const EdgeList kRook4x4 = {
    {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 8},   {0, 12},  {1, 2},   {1, 3},
    {1, 5},   {1, 9},   {1, 13},  {2, 3},   {2, 6},   {2, 10},  {2, 14},  {3, 7},
    {3, 11},  {3, 15},  {4, 5},   {4, 6},   {4, 7},   {4, 8},   {4, 12},  {5, 6},
    {5, 7},   {5, 9},   {5, 13},  {6, 7},   {6, 10},  {6, 14},  {7, 11},  {7, 15},
    {8, 9},   {8, 10},  {8, 11},  {8, 12},  {9, 10},  {9, 11},  {9, 13},  {10, 11},
    {10, 14}, {11, 15}, {12, 13}, {12, 14}, {12, 15}, {13, 14}, {13, 15}, {14, 15}};

std::vector<GraphPair> make_bank() {
  std::vector<GraphPair> bank;
  bank.push_back({"c6-vs-2c3", build_graph(6, kCycle6), build_graph(6, kTwoTriangles),
                  PairCategory::basic, false, true});
  bank.push_back({"decalin-like", build_graph(6, kTwoSquaresSharingEdge),
                  build_graph(6, kBridgedTriangles), PairCategory::extension_like, false, true});
  bank.push_back({"decalin-bicyclopentyl", build_graph(10, kDecalin),
                  build_graph(10, kBicyclopentyl), PairCategory::basic, false, false});
  bank.push_back({"prism-vs-k33", build_graph(6, kPrism), build_graph(6, kK33),
                  PairCategory::regular, false, true});
  bank.push_back({"srg-16", build_graph(16, kShrikhande), build_graph(16, kRook4x4),
                  PairCategory::regular, false, false});
  bank.push_back({"iso-control", build_graph(6, kCycle6), build_graph(6, kCycle6Relabeled),
                  PairCategory::isomorphic_control, false, false});
  return bank;
}

}  // namespace

std::string_view to_string(PairCategory category) {
  switch (category) {
    case PairCategory::basic: return "basic";
    case PairCategory::regular: return "regular";
    case PairCategory::extension_like: return "extension-like";
    case PairCategory::isomorphic_control: return "isomorphic-control";
  }
  return "?";
}

const std::vector<GraphPair>& pair_bank() {
  static const std::vector<GraphPair> bank = make_bank();
  return bank;
}

const GraphPair& find_pair(std::string_view name) {
  for (const auto& p : pair_bank()) {
    if (p.name == name) return p;
  }
  throw Error("unknown pair '" + std::string(name) + "'");
}

}  // namespace ppgt
