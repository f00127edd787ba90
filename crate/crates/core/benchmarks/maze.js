// Breadth-first search for the shortest path between two cells of a maze.
let c = require('containerless');
let grid = __GRID__;

function main(req) {
  let n = grid.length;
  let start = req.body.start;
  let goal = req.body.goal;
  let sr = start[0];
  let sc = start[1];
  let gr = goal[0];
  let gc = goal[1];
  if (grid[sr][sc] !== '.' || grid[gr][gc] !== '.') {
    c.respond({ distance: -1, reason: 'wall' });
  } else {
    let dist = [];
    let k = 0;
    while (k < n * n) {
      dist[k] = -1;
      k = k + 1;
    }
    let dr = [1, -1, 0, 0];
    let dc = [0, 0, 1, -1];
    let queue = [sr * n + sc];
    dist[sr * n + sc] = 0;
    let head = 0;
    let target = gr * n + gc;
    while (head < queue.length && dist[target] === -1) {
      let cell = queue[head];
      head = head + 1;
      let r = (cell - cell % n) / n;
      let col = cell % n;
      let d = 0;
      while (d < 4) {
        let nr = r + dr[d];
        let nc = col + dc[d];
        if (nr >= 0 && nr < n && nc >= 0 && nc < n) {
          let next = nr * n + nc;
          if (grid[nr][nc] === '.' && dist[next] === -1) {
            dist[next] = dist[cell] + 1;
            queue[queue.length] = next;
          }
        }
        d = d + 1;
      }
    }
    c.respond({ distance: dist[target], explored: head });
  }
}
