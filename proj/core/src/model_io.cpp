#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "floret/error.hpp"
#include "floret/io.hpp"

namespace floret {

using nlohmann::json;

namespace {

std::string pointer_child(const std::string& base, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') {
      escaped += "~0";
    } else if (c == '/') {
      escaped += "~1";
    } else {
      escaped += c;
    }
  }
  return base + "/" + escaped;
}

std::vector<Floret> parse_florets(const json& spec) {
  if (!spec.contains("florets")) throw ModelError("missing field 'florets'", "");
  const json& arr = spec.at("florets");
  if (!arr.is_array()) throw ModelError("'florets' must be an array", "/florets");
  std::vector<Floret> florets;
  for (std::size_t f = 0; f < arr.size(); ++f) {
    const auto where = "/florets/" + std::to_string(f);
    const json& item = arr[f];
    if (!item.is_object()) throw ModelError("floret must be an object", where);
    if (!item.contains("id") || !item["id"].is_string()) {
      throw ModelError("floret needs a string 'id'", where);
    }
    if (!item.contains("outcomes") || !item["outcomes"].is_array()) {
      throw ModelError("floret needs an 'outcomes' array", where);
    }
    Floret fl;
    fl.id = item["id"].get<std::string>();
    for (const auto& label : item["outcomes"]) {
      if (!label.is_string()) throw ModelError("outcome labels must be strings", where + "/outcomes");
      fl.outcomes.push_back(label.get<std::string>());
    }
    florets.push_back(std::move(fl));
  }
  return florets;
}

class TreeFlattener {
 public:
  explicit TreeFlattener(const std::vector<Floret>& florets) : florets_(florets) {}

  std::size_t add(const json& node, const std::string& where) {
    if (!node.is_object()) throw ModelError("node must be an object or \"leaf\"", where);
    if (!node.contains("floret") || !node["floret"].is_string()) {
      throw ModelError("node needs a string 'floret'", where);
    }
    const auto id = node["floret"].get<std::string>();
    std::size_t f = florets_.size();
    for (std::size_t k = 0; k < florets_.size(); ++k) {
      if (florets_[k].id == id) f = k;
    }
    if (f == florets_.size()) {
      throw ModelError("unknown floret reference '" + id + "'", where + "/floret");
    }
    if (!node.contains("children") || !node["children"].is_object()) {
      throw ModelError("node needs a 'children' object", where);
    }
    const json& children = node["children"];
    const Floret& fl = florets_[f];
    if (children.size() != fl.arity()) {
      throw ModelError("node declares " + std::to_string(children.size()) +
                           " children but floret '" + id + "' has " + std::to_string(fl.arity()) +
                           " outcomes",
                       where + "/children");
    }
    for (const auto& [label, _] : children.items()) {
      if (std::find(fl.outcomes.begin(), fl.outcomes.end(), label) == fl.outcomes.end()) {
        throw ModelError("'" + label + "' is not an outcome of floret '" + id + "'",
                         pointer_child(where + "/children", label));
      }
    }

    const std::size_t index = nodes_.size();
    nodes_.push_back({f, {}});
    std::vector<std::optional<std::size_t>> kids;
    for (const auto& label : fl.outcomes) {
      const json& child = children.at(label);
      const auto child_where = pointer_child(where + "/children", label);
      if (child.is_string()) {
        if (child.get<std::string>() != "leaf") {
          throw ModelError("child must be a node object or \"leaf\"", child_where);
        }
        kids.emplace_back(std::nullopt);
      } else {
        kids.emplace_back(add(child, child_where));
      }
    }
    nodes_[index].children = std::move(kids);
    return index;
  }

  std::vector<NodeSpec> take() { return std::move(nodes_); }

 private:
  const std::vector<Floret>& florets_;
  std::vector<NodeSpec> nodes_;
};

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    // nlohmann prefixes "[json.exception.parse_error.101] parse error at ...".
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ModelError("invalid JSON: " + what, line_column(text, e.byte > 0 ? e.byte - 1 : 0));
  }
}

}  // namespace

SequentialTree validate_tree(const json& spec) {
  if (!spec.is_object()) throw ModelError("model must be a JSON object", "");
  std::vector<Floret> florets = parse_florets(spec);
  if (!spec.contains("tree")) throw ModelError("missing field 'tree'", "");
  // Check the florets before walking nodes so a broken floret is reported
  // as such rather than as an arity mismatch somewhere in the tree.
  SequentialTree::validate_florets(florets);
  TreeFlattener flattener(florets);
  flattener.add(spec.at("tree"), "/tree");
  return SequentialTree(std::move(florets), flattener.take());
}

SequentialTree parse_model(std::string_view text) { return validate_tree(parse_json(text)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Model load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Model(parse_model(text));
  } catch (const ModelError& e) {
    throw ModelError(e.what(), path.string());
  }
}

json model_to_json(const SequentialTree& tree) {
  json florets = json::array();
  for (const auto& f : tree.florets()) florets.push_back({{"id", f.id}, {"outcomes", f.outcomes}});
  auto node_json = [&](auto&& self, std::size_t k) -> json {
    const NodeSpec& node = tree.nodes()[k];
    const Floret& fl = tree.florets()[node.floret];
    json children = json::object();
    for (std::size_t j = 0; j < node.children.size(); ++j) {
      children[fl.outcomes[j]] = node.children[j] ? self(self, *node.children[j]) : json("leaf");
    }
    return {{"floret", fl.id}, {"children", children}};
  };
  return {{"florets", florets}, {"tree", node_json(node_json, 0)}};
}

// ---------------------------------------------------------------------------
// Counts

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::int64_t parse_count(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(field, &used);
  } catch (const std::exception&) {
    throw DataError("count '" + field + "' is not an integer", where);
  }
  if (used != field.size()) throw DataError("count '" + field + "' is not an integer", where);
  if (value < 0) throw DataError("count must be non-negative", where);
  return value;
}

ObservedCounts parse_json_counts(std::string_view text, const SequentialTree& tree) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what(),
                    line_column(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!arr.is_array()) throw DataError("data must be a JSON array of counts");
  if (arr.size() != tree.leaf_count()) {
    throw DataError("data has " + std::to_string(arr.size()) + " counts but the model has " +
                    std::to_string(tree.leaf_count()) + " leaves");
  }
  std::vector<std::int64_t> counts;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto where = "/" + std::to_string(i);
    if (!arr[i].is_number_integer()) throw DataError("count must be an integer", where);
    const auto v = arr[i].get<std::int64_t>();
    if (v < 0) throw DataError("count must be non-negative", where);
    counts.push_back(v);
  }
  return ObservedCounts(std::move(counts));
}

ObservedCounts parse_csv_counts(std::string_view text, const SequentialTree& tree) {
  std::vector<std::int64_t> counts(tree.leaf_count(), 0);
  std::vector<bool> seen(tree.leaf_count(), false);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    const std::string row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto comma = row.rfind(',');
    if (comma == std::string::npos) throw DataError("expected 'leaf_path,count'", where);
    const std::string path = trim(std::string_view(row).substr(0, comma));
    const std::string count = trim(std::string_view(row).substr(comma + 1));
    if (path == "leaf_path" && count == "count") continue;
    const auto leaf = tree.leaf_index(path);
    if (!leaf) throw DataError("'" + path + "' is not a leaf path of the model", where);
    if (seen[*leaf]) throw DataError("leaf path '" + path + "' listed twice", where);
    seen[*leaf] = true;
    counts[*leaf] = parse_count(count, where);
  }
  return ObservedCounts(std::move(counts));
}

}  // namespace

ObservedCounts parse_counts(std::string_view text, const SequentialTree& tree) {
  const std::string body = trim(text);
  if (body.empty()) throw DataError("data file is empty");
  if (body.front() == '[') return parse_json_counts(text, tree);
  return parse_csv_counts(text, tree);
}

ObservedCounts load_counts(const std::filesystem::path& path, const SequentialTree& tree) {
  const std::string text = read_file(path);
  try {
    return parse_counts(text, tree);
  } catch (const DataError& e) {
    throw DataError(e.what(), path.string());
  }
}

std::string format_counts(const ObservedCounts& y, const SequentialTree& tree, CountsFormat format) {
  if (y.size() != tree.leaf_count()) throw DataError("count vector length does not match leaf count");
  if (format == CountsFormat::json) {
    return json(std::vector<std::int64_t>(y.values().begin(), y.values().end())).dump() + "\n";
  }
  std::string out = "leaf_path,count\n";
  for (std::size_t i = 0; i < y.size(); ++i) {
    out += tree.leaves()[i].label + "," + std::to_string(y[i]) + "\n";
  }
  return out;
}

}  // namespace floret
