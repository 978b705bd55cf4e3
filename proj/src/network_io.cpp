#include "cpdgrid/network_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cpdgrid/error.hpp"

namespace cpdgrid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

void reject_unknown(const json& object, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (allowed.count(key) == 0) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string as_label(const json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string node label");
  return value.get<std::string>();
}

double as_number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  return value.get<double>();
}

}  // namespace

Network parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann messages already carry "at line L, column C".
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) fail("$", "network document must be a JSON object");
  reject_unknown(doc, "", {"nodes", "branches", "injections", "interior"});

  if (!doc.contains("nodes") || !doc["nodes"].is_array()) fail("nodes", "required array missing");
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    nodes.push_back(as_label(doc["nodes"][i], "nodes[" + std::to_string(i) + "]"));
  }

  if (!doc.contains("branches") || !doc["branches"].is_array()) {
    fail("branches", "required array missing");
  }
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < doc["branches"].size(); ++i) {
    const auto path = "branches[" + std::to_string(i) + "]";
    const auto& item = doc["branches"][i];
    if (!item.is_object()) fail(path, "expected an object");
    reject_unknown(item, path, {"a", "b", "g_siemens"});
    for (const char* key : {"a", "b", "g_siemens"}) {
      if (!item.contains(key)) fail(path + "." + key, "required field missing");
    }
    branches.push_back({as_label(item["a"], path + ".a"), as_label(item["b"], path + ".b"),
                        as_number(item["g_siemens"], path + ".g_siemens")});
  }

  std::map<std::string, double> injections;
  if (doc.contains("injections")) {
    if (!doc["injections"].is_object()) fail("injections", "expected an object");
    for (const auto& [node, watts] : doc["injections"].items()) {
      injections[node] = as_number(watts, "injections." + node);
    }
  }

  std::vector<std::string> interior;
  if (doc.contains("interior")) {
    if (!doc["interior"].is_array()) fail("interior", "expected an array");
    for (std::size_t i = 0; i < doc["interior"].size(); ++i) {
      interior.push_back(as_label(doc["interior"][i], "interior[" + std::to_string(i) + "]"));
    }
  }

  return Network(std::move(nodes), std::move(branches), std::move(injections),
                 std::move(interior));
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_network(buffer.str());
}

std::string network_to_json(const Network& network) {
  json doc = json::object();
  doc["nodes"] = network.nodes();
  doc["branches"] = json::array();
  for (const auto& branch : network.branches()) {
    doc["branches"].push_back({{"a", branch.a}, {"b", branch.b}, {"g_siemens", branch.conductance}});
  }
  doc["injections"] = json::object();
  for (const auto& [node, watts] : network.injections()) doc["injections"][node] = watts;
  doc["interior"] = network.interior();
  return doc.dump(2) + "\n";
}

}  // namespace cpdgrid
