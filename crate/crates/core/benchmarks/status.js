// Maps a build result to a commit status in the format the GitHub API wants.
let c = require('containerless');

function main(req) {
  let b = req.body;
  let state = 'failure';
  let description = 'The build failed';
  if (b.ok) {
    state = 'success';
    description = 'The build succeeded';
  }
  let status = {
    state: state,
    target_url: 'https://ci.example.com/builds/' + b.build,
    description: description,
    context: 'ci/accel'
  };
  let url = 'github/repos/' + b.repo + '/statuses/' + b.sha;
  c.post({ url: url, body: status }, function(resp) {
    if (resp === undefined) {
      c.respond({ error: 'status update failed' });
    } else {
      c.respond({ id: resp.id, state: resp.state, sha: b.sha });
    }
  });
}
