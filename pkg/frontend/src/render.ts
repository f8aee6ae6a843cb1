/**
 * Three.js scene wiring: one mesh, one orbiting camera driven entirely by
 * ViewerState. Pan moves the look-at target in the camera plane, orbit
 * spins around it, zoom shortens the boom multiplicatively.
 */

import * as THREE from "three";
import type { ParsedMesh } from "./loaders.js";
import type { ViewerState } from "./state.js";

const BASE_DISTANCE = 4.0;

export interface SceneHandle {
  renderFrame(state: ViewerState): void;
  setMesh(mesh: ParsedMesh): void;
  resize(width: number, height: number): void;
}

export function createScene(canvas: HTMLCanvasElement): SceneHandle {
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  renderer.setPixelRatio(window.devicePixelRatio);
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x10141a);
  const camera = new THREE.PerspectiveCamera(50, 16 / 9, 0.01, 1000);

  let mesh: THREE.Mesh<THREE.BufferGeometry, THREE.MeshNormalMaterial> = new THREE.Mesh(
    new THREE.TorusKnotGeometry(1.0, 0.32, 180, 24),
    new THREE.MeshNormalMaterial(),
  );
  scene.add(mesh);
  scene.add(new THREE.AxesHelper(1.6));

  const target = new THREE.Vector3();

  return {
    renderFrame(state: ViewerState): void {
      // screen-space pan: +x right, +y down in image coordinates
      target.set(state.panX, -state.panY, 0);
      const dist = BASE_DISTANCE / state.zoom;
      const cp = Math.cos(state.pitch);
      camera.position.set(
        target.x + dist * cp * Math.sin(state.yaw),
        target.y + dist * Math.sin(state.pitch),
        target.z + dist * cp * Math.cos(state.yaw),
      );
      camera.lookAt(target);
      renderer.render(scene, camera);
    },

    setMesh(parsed: ParsedMesh): void {
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
      geometry.computeVertexNormals();
      geometry.center();
      geometry.computeBoundingSphere();
      const radius = geometry.boundingSphere?.radius ?? 1;
      if (radius > 0) geometry.scale(1.2 / radius, 1.2 / radius, 1.2 / radius);
      scene.remove(mesh);
      mesh.geometry.dispose();
      mesh = new THREE.Mesh(geometry, new THREE.MeshNormalMaterial());
      scene.add(mesh);
    },

    resize(width: number, height: number): void {
      renderer.setSize(width, height, false);
      camera.aspect = width / height;
      camera.updateProjectionMatrix();
    },
  };
}
