#ifndef HELFRICH_H
#define HELFRICH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HelfrichStatus {
  HELFRICH_STATUS_OK = 0,
  HELFRICH_STATUS_INVALID_INPUT = 1,
  HELFRICH_STATUS_NUMERICAL = 2,
  HELFRICH_STATUS_PARSE = 3,
  HELFRICH_STATUS_IO = 4,
  HELFRICH_STATUS_NULL_POINTER = 5,
  HELFRICH_STATUS_PANIC = 6,
} HelfrichStatus;

// Opaque triangle mesh.
typedef struct HelfrichMesh HelfrichMesh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *helfrich_version(void);

// Message of the last failed call on this thread, empty after a success.
// Valid until the next call into the library on the same thread.
const char *helfrich_last_error(void);

// Build a mesh from `3 * n_vertices` coordinates and `3 * n_faces`
// zero-based vertex indices.
//
// # Safety
// `vertices` and `faces` must point to arrays of the stated lengths and
// `out` must be writable.
enum HelfrichStatus helfrich_mesh_new(const double *vertices,
                                      size_t n_vertices,
                                      const uint32_t *faces,
                                      size_t n_faces,
                                      struct HelfrichMesh **out);

// Generate a primitive from its JSON description, for example
// `{"kind": "icosphere", "radius": 1, "level": 3}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` writable.
enum HelfrichStatus helfrich_mesh_primitive(const char *spec_json, struct HelfrichMesh **out);

// Read an OBJ, OFF or JSON mesh file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum HelfrichStatus helfrich_mesh_load(const char *path, struct HelfrichMesh **out);

// # Safety
// `mesh` must come from this library and not be used afterwards. Null is
// ignored.
void helfrich_mesh_free(struct HelfrichMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t helfrich_mesh_vertex_count(const struct HelfrichMesh *mesh);

// # Safety
// `mesh` must be a live handle or null (which yields 0).
size_t helfrich_mesh_face_count(const struct HelfrichMesh *mesh);

// Copy vertex coordinates into `out`, which must hold `3 * vertex_count`.
//
// # Safety
// `mesh` must be a live handle and `out` must have room for `len` values.
enum HelfrichStatus helfrich_mesh_vertices(const struct HelfrichMesh *mesh,
                                           double *out,
                                           size_t len);

// Copy face indices into `out`, which must hold `3 * face_count`.
//
// # Safety
// `mesh` must be a live handle and `out` must have room for `len` values.
enum HelfrichStatus helfrich_mesh_faces(const struct HelfrichMesh *mesh, uint32_t *out, size_t len);

// Helfrich energy; `lambda = 0` is allowed. Either output may be null.
//
// # Safety
// `mesh` must be a live handle; non-null outputs must be writable.
enum HelfrichStatus helfrich_energy(const struct HelfrichMesh *mesh,
                                    double h0,
                                    double lambda,
                                    double *out_bending,
                                    double *out_total);

// Energy gradient with respect to vertex positions, `3 * vertex_count`
// values.
//
// # Safety
// `mesh` must be a live handle and `out` must have room for `len` values.
enum HelfrichStatus helfrich_energy_gradient(const struct HelfrichMesh *mesh,
                                             double h0,
                                             double lambda,
                                             double *out,
                                             size_t len);

// Minimize the energy from `mesh`. `boundary_json` describes the clamped
// boundary (required for open meshes, may be null for closed ones);
// `options_json` may be null for defaults. The minimized mesh is a new
// handle.
//
// # Safety
// `mesh` must be a live handle, string arguments NUL-terminated or null,
// `out` writable and `out_energy` writable or null.
enum HelfrichStatus helfrich_minimize(const struct HelfrichMesh *mesh,
                                      double h0,
                                      double lambda,
                                      const char *boundary_json,
                                      const char *options_json,
                                      struct HelfrichMesh **out,
                                      double *out_energy);

// Run a command-line experiment (`"energy"`, `"minimize"`, ...) on a JSON
// configuration, writing artifacts and `manifest.json` into `out_dir`.
// `exit_code` receives the command's exit status (0, 1 or 2); the return
// value reports failures to run at all.
//
// # Safety
// String arguments must be NUL-terminated; `out_dir` may be null to use
// the configuration's `out`. `exit_code` must be writable.
enum HelfrichStatus helfrich_run(const char *command,
                                 const char *config_json,
                                 const char *out_dir,
                                 int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HELFRICH_H */
