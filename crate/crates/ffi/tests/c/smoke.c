#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "helfrich.h"

int main(void) {
    HelfrichMesh *mesh = NULL;
    if (helfrich_mesh_primitive("{\"kind\": \"icosphere\", \"radius\": 1, \"level\": 3}", &mesh) != HELFRICH_STATUS_OK) {
        fprintf(stderr, "%s\n", helfrich_last_error());
        return 1;
    }
    double total = 0.0;
    if (helfrich_energy(mesh, 0.0, 0.0, NULL, &total) != HELFRICH_STATUS_OK) {
        return 1;
    }
    size_t n = helfrich_mesh_vertex_count(mesh);
    double *g = malloc(3 * n * sizeof(double));
    HelfrichStatus bad = helfrich_energy_gradient(mesh, 0.0, 0.0, g, 3);
    HelfrichStatus good = helfrich_energy_gradient(mesh, 0.0, 0.0, g, 3 * n);
    free(g);
    helfrich_mesh_free(mesh);
    printf("%zu %.6f %d %d\n", n, total, (int)bad, (int)good);
    return fabs(total - 16.0 * 3.14159265358979) < 0.02 * 16.0 * 3.14159265358979 ? 0 : 1;
}
