// Receives a file in the request body and uploads it to cloud storage.
let c = require('containerless');

function main(req) {
  let file = req.body;
  if (file.name === undefined || file.content === undefined) {
    c.respond({ error: 'expected a name and content' });
  } else {
    let dest = { bucket: 'uploads', name: file.name, content: file.content };
    c.post({ url: 'storage/upload', body: dest }, function(resp) {
      if (resp === undefined) {
        c.respond({ error: 'upload failed' });
      } else {
        c.respond({ uploaded: 'uploads/' + file.name, bytes: resp.length });
      }
    });
  }
}
