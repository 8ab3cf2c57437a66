// Copyright 2026 The CRTM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Extraction of internal links from wikitext-style markup.
//
// Only the two internal-link forms are recognized:
//   [[Title]]          anchor text is the title
//   [[Title|anchor]]   anchor text follows the first pipe
// Everything else (templates, tables, external links) is passed through as
// plain text.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace crtm {

struct MarkupLink {
  std::string target;
  std::string anchor;
  // Byte range of the anchor text inside the returned plain text.
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct MarkupResult {
  std::string plain;
  std::vector<MarkupLink> links;
  // Recoverable problems: unterminated spans, empty titles or anchors.
  std::vector<std::string> warnings;
};

inline MarkupResult parse_markup(std::string_view raw) {
  MarkupResult out;
  out.plain.reserve(raw.size());
  std::size_t pos = 0;
  while (pos < raw.size()) {
    const std::size_t open = raw.find("[[", pos);
    if (open == std::string_view::npos) {
      out.plain.append(raw.substr(pos));
      break;
    }
    out.plain.append(raw.substr(pos, open - pos));
    const std::size_t close = raw.find("]]", open + 2);
    if (close == std::string_view::npos) {
      out.warnings.push_back("unterminated link at byte " + std::to_string(open));
      out.plain.append(raw.substr(open));
      break;
    }
    const std::string_view body = raw.substr(open + 2, close - open - 2);
    const std::size_t pipe = body.find('|');
    std::string_view title = pipe == std::string_view::npos ? body : body.substr(0, pipe);
    const std::string_view anchor = pipe == std::string_view::npos ? body : body.substr(pipe + 1);

    while (!title.empty() && title.front() == ' ') title.remove_prefix(1);
    while (!title.empty() && title.back() == ' ') title.remove_suffix(1);

    const std::size_t begin = out.plain.size();
    out.plain.append(anchor);
    if (title.empty()) {
      out.warnings.push_back("link with empty title at byte " + std::to_string(open) + " dropped");
    } else if (anchor.empty()) {
      out.warnings.push_back("link with empty anchor at byte " + std::to_string(open) + " dropped");
    } else {
      out.links.push_back({std::string(title), std::string(anchor), begin, out.plain.size()});
    }
    pos = close + 2;
  }
  return out;
}

}  // namespace crtm
