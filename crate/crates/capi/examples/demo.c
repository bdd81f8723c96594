/* Build (from the workspace root, after `cargo build --release`):
 *
 *   cc crates/capi/examples/demo.c -Icrates/capi/include \
 *      -Ltarget/release -lcausal_twin_capi -lpthread -ldl -lm -o demo
 */
#include <stdio.h>

#include "causal_twin.h"

static const char *GRAPH =
    "{\"nodes\": [{\"name\": \"Z\", \"cardinality\": 2},"
    "            {\"name\": \"T\", \"cardinality\": 2},"
    "            {\"name\": \"Y\", \"cardinality\": 2}],"
    " \"edges\": [[\"Z\", \"T\"], [\"Z\", \"Y\"], [\"T\", \"Y\"]]}";

static const char *CPTS =
    "{\"Z\": [[0.7, 0.3]],"
    " \"T\": [[0.6, 0.4], [0.3, 0.7]],"
    " \"Y\": [[0.5, 0.5], [0.8, 0.2], [0.5, 0.5], [0.1, 0.9]]}";

int main(void) {
  CtGraph *graph = NULL;
  if (ct_graph_from_json(GRAPH, &graph) != CT_OK) {
    fprintf(stderr, "graph: %s\n", ct_last_error());
    return 1;
  }
  printf("nodes: %zu\n", ct_graph_node_count(graph));

  CtTwin *twin = NULL;
  if (ct_twin_build(graph, "T", 1, &twin) != CT_OK) {
    fprintf(stderr, "twin: %s\n", ct_last_error());
    return 1;
  }
  char *dot = NULL;
  if (ct_twin_to_dot(twin, &dot) == CT_OK) {
    printf("%s", dot);
    ct_string_free(dot);
  }

  double probs[2] = {0};
  if (ct_interventional_marginal(graph, CPTS, "T", 1, "Y", probs, 2) != CT_OK) {
    fprintf(stderr, "marginal: %s\n", ct_last_error());
    return 1;
  }
  printf("P(Y* | do(T=1)) = [%.4f, %.4f]\n", probs[0], probs[1]);

  ct_twin_free(twin);
  ct_graph_free(graph);
  return 0;
}
